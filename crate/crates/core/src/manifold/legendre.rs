//! Fully normalised associated Legendre functions without the
//! Condon-Shortley phase, scaled so that P(l, m) cos(m phi) * sqrt(2)
//! is L2-normalised on the unit sphere.

use std::f64::consts::PI;

/// Flat index of (l, m) with 0 <= m <= l.
#[inline]
pub fn lm_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Fill `out` with normalised P(l, m)(cos theta) for l <= lmax.
pub fn normalized_legendre(lmax: usize, cos_t: f64, sin_t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize((lmax + 1) * (lmax + 2) / 2, 0.0);
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t;
        }
        out[lm_index(m, m)] = pmm;
        if m < lmax {
            let p1 = (2.0 * m as f64 + 3.0).sqrt() * cos_t * pmm;
            out[lm_index(m + 1, m)] = p1;
            let mut p_prev = pmm;
            let mut p_cur = p1;
            let m2 = (m * m) as f64;
            for l in (m + 2)..=lmax {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - m2)).sqrt();
                let lm1 = lf - 1.0;
                let b = ((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
                let p_next = a * (cos_t * p_cur - b * p_prev);
                out[lm_index(l, m)] = p_next;
                p_prev = p_cur;
                p_cur = p_next;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        let th: f64 = 0.83;
        let (s, c) = th.sin_cos();
        let mut out = Vec::new();
        normalized_legendre(2, c, s, &mut out);
        let k = |x: f64| x.sqrt();
        assert!((out[lm_index(0, 0)] - k(1.0 / (4.0 * PI))).abs() < 1e-15);
        assert!((out[lm_index(1, 0)] - k(3.0 / (4.0 * PI)) * c).abs() < 1e-15);
        assert!((out[lm_index(1, 1)] - k(3.0 / (8.0 * PI)) * s).abs() < 1e-15);
        assert!((out[lm_index(2, 0)] - k(5.0 / (16.0 * PI)) * (3.0 * c * c - 1.0)).abs() < 1e-14);
        assert!((out[lm_index(2, 1)] - k(15.0 / (8.0 * PI)) * s * c).abs() < 1e-14);
        assert!((out[lm_index(2, 2)] - k(15.0 / (32.0 * PI)) * s * s).abs() < 1e-14);
    }
}
