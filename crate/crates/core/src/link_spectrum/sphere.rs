use super::{BasisTag, EigenEntry, Spectrum};
use crate::error::Result;

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the degree-l harmonic polynomials on ℝ^{n+1}.
pub(crate) fn harmonic_multiplicity(n: usize, l: usize) -> usize {
    let (n, l) = (n as i64, l as i64);
    (binomial(n + l, n) - binomial(n + l - 2, n)) as usize
}

/// λ_l = l(l + n − 1) on the unit sphere S^n.
pub(crate) fn sphere_spectrum(n: usize, lambda_max: f64) -> Result<Spectrum> {
    let mut entries = Vec::new();
    for l in 0usize.. {
        let lambda = (l * (l + n - 1)) as f64;
        if lambda > lambda_max {
            break;
        }
        entries.push(EigenEntry {
            lambda,
            multiplicity: harmonic_multiplicity(n, l),
            basis: BasisTag::SphericalDegree(l),
        });
    }
    Ok(Spectrum { lambda_max, entries, tol: 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities() {
        // S^1: 1, 2, 2, ...; S^2: 2l + 1; S^3: (l + 1)^2.
        assert_eq!(harmonic_multiplicity(1, 0), 1);
        assert_eq!(harmonic_multiplicity(1, 5), 2);
        for l in 0..10 {
            assert_eq!(harmonic_multiplicity(2, l), 2 * l + 1);
            assert_eq!(harmonic_multiplicity(3, l), (l + 1) * (l + 1));
        }
    }
}
