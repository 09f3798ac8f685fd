//! Weighted Hölder and Sobolev norms on manifolds with conical points, and
//! decay-rate estimation from dyadic annulus suprema.
//!
//! Derivatives are supplied by the caller as pointwise norms |∇ʲu|, so this
//! module stays independent of any particular discretization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One weight per conical point; ρ^γ means ρ^{γᵢ} on the i-th chart and 1
/// away from all charts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub gamma: Vec<f64>,
}

impl WeightVector {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if let Some(g) = gamma.iter().find(|g| !g.is_finite()) {
            return Err(Error::InvalidInput(format!("weight {g} is not finite")));
        }
        Ok(WeightVector { gamma })
    }

    pub fn uniform(n: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![gamma; n])
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// Largest |γᵢ|.
    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(0.0, |a, g| a.max(g.abs()))
    }
}

/// A cone chart around a singular point: ρ agrees with the distance r to
/// `center` for r < radius/2 and blends smoothly to 1 by r = radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeChart {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// A radius function on the complement of finitely many points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFunction {
    pub charts: Vec<ConeChart>,
    /// Declared ε in |ρ − r| = O(r^{1+ε}); only the sampled bound is checked.
    pub epsilon: f64,
}

/// Smooth step: 1 on (−∞, 1/2], 0 on [1, ∞), C^∞ in between.
pub fn smooth_cutoff(s: f64) -> f64 {
    fn psi(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    if s <= 0.5 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let x = 2.0 * (1.0 - s); // 1 at s = 1/2, 0 at s = 1
        psi(x) / (psi(x) + psi(1.0 - x))
    }
}

impl RadiusFunction {
    pub fn new(charts: Vec<ConeChart>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        for (i, c) in charts.iter().enumerate() {
            if !(c.radius > 0.0 && c.radius <= 1.0) {
                return Err(Error::InvalidInput(format!("chart {i} radius must lie in (0, 1], got {}", c.radius)));
            }
            if c.center.len() != charts[0].center.len() {
                return Err(Error::InvalidInput("chart centers differ in dimension".into()));
            }
        }
        for i in 0..charts.len() {
            for j in i + 1..charts.len() {
                if dist(&charts[i].center, &charts[j].center) < charts[i].radius + charts[j].radius {
                    return Err(Error::InvalidInput(format!("charts {i} and {j} overlap")));
                }
            }
        }
        Ok(RadiusFunction { charts, epsilon })
    }

    /// ρ(x) and the chart it belongs to (None where ρ ≡ 1).
    pub fn eval(&self, x: &[f64]) -> (f64, Option<usize>) {
        for (i, c) in self.charts.iter().enumerate() {
            let r = dist(x, &c.center);
            if r < c.radius {
                let chi = smooth_cutoff(r / c.radius);
                return (chi * r + (1.0 - chi), Some(i));
            }
        }
        (1.0, None)
    }

    /// Builds a weighted sample at `x` from derivative norms |∇ʲu(x)|.
    pub fn sample(&self, x: &[f64], derivs: Vec<f64>) -> Sample {
        let (rho, component) = self.eval(x);
        Sample { rho, component, derivs }
    }

    /// max over `points` inside a chart of |ρ − r| / r^{1+ε}.
    pub fn chart_ratio(&self, points: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in points {
            for c in &self.charts {
                let r = dist(x, &c.center);
                if r > 0.0 && r < c.radius {
                    let (rho, _) = self.eval(x);
                    worst = worst.max((rho - r).abs() / r.powf(1.0 + self.epsilon));
                }
            }
        }
        worst
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Pointwise data of a function: ρ, the chart index selecting γᵢ, and
/// derivs[j] = |∇ʲu| for j = 0..=k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub rho: f64,
    pub component: Option<usize>,
    pub derivs: Vec<f64>,
}

fn weight_exponent(s: &Sample, gamma: &WeightVector) -> Result<f64> {
    match s.component {
        None => Ok(0.0),
        Some(i) => gamma.gamma.get(i).copied().ok_or_else(|| {
            Error::InvalidInput(format!("sample refers to chart {i} but only {} weights given", gamma.len()))
        }),
    }
}

fn check_sample(s: &Sample, k: usize) -> Result<()> {
    if s.derivs.len() <= k {
        return Err(Error::MissingDerivative(s.derivs.len()));
    }
    if !(s.rho > 0.0 && s.rho <= 1.0) {
        return Err(Error::InvalidInput(format!("rho must lie in (0, 1], got {}", s.rho)));
    }
    Ok(())
}

/// C^k_γ norm: Σ_{j ≤ k} sup |ρ^{−γ+j} ∇ʲu|.
pub fn holder_norm(samples: &[Sample], k: usize, gamma: &WeightVector) -> Result<f64> {
    let mut sups = vec![0.0f64; k + 1];
    for s in samples {
        check_sample(s, k)?;
        let g = weight_exponent(s, gamma)?;
        for (j, sup) in sups.iter_mut().enumerate() {
            let w = if s.component.is_some() { s.rho.powf(-g + j as f64) } else { 1.0 };
            *sup = sup.max(w * s.derivs[j].abs());
        }
    }
    Ok(sups.iter().sum())
}

/// L^p_{k,γ} norm: (Σ_{j ≤ k} Σ_q w_q |ρ^{−γ+j} ∇ʲu|^p ρ^{−m})^{1/p}, with
/// `weights` the quadrature weights for dV_g.
pub fn sobolev_norm(
    samples: &[Sample],
    weights: &[f64],
    k: usize,
    p: f64,
    gamma: &WeightVector,
    m: usize,
) -> Result<f64> {
    if !(1.0..f64::INFINITY).contains(&p) {
        return Err(Error::InvalidInput(format!("p must lie in [1, inf), got {p}")));
    }
    if weights.len() != samples.len() {
        return Err(Error::InvalidInput(format!("{} quadrature weights for {} samples", weights.len(), samples.len())));
    }
    let mut total = 0.0;
    for (s, &w) in samples.iter().zip(weights) {
        check_sample(s, k)?;
        let g = weight_exponent(s, gamma)?;
        let chart = s.component.is_some();
        let measure = if chart { s.rho.powi(-(m as i32)) } else { 1.0 };
        for j in 0..=k {
            let wt = if chart { s.rho.powf(-g + j as f64) } else { 1.0 };
            total += w * (wt * s.derivs[j].abs()).powf(p) * measure;
        }
    }
    Ok(total.powf(1.0 / p))
}

/// A fitted decay rate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub std_err: f64,
}

/// Least-squares slope of log(sup) against log(radius).
pub fn decay_rate(radii: &[f64], suprema: &[f64]) -> Result<RateFit> {
    if radii.len() != suprema.len() {
        return Err(Error::InvalidInput("radii and suprema differ in length".into()));
    }
    if radii.len() < 5 {
        return Err(Error::InvalidInput(format!("need at least 5 annuli, got {}", radii.len())));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput("annulus radii must be positive".into()));
    }
    if suprema.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::DegenerateData("zero or non-finite annulus supremum".into()));
    }
    let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = suprema.iter().map(|s| s.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateData("all annuli at the same radius".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let rate = sxy / sxx;
    let icept = my - rate * mx;
    let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - icept - rate * a).powi(2)).sum();
    let std_err = (sse / (n - 2.0) / sxx).sqrt();
    Ok(RateFit { rate, std_err })
}

/// Suprema of |values| over the dyadic annuli [r_hi/2^{i+1}, r_hi/2^i) that
/// lie above `r_lo`. Returns (radius where each supremum is attained,
/// supremum), innermost first; empty annuli are skipped.
pub fn dyadic_suprema(r: &[f64], values: &[f64], r_lo: f64, r_hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut radii = Vec::new();
    let mut sups = Vec::new();
    let mut outer = r_hi;
    while outer / 2.0 >= r_lo * (1.0 - 1e-12) {
        let inner = outer / 2.0;
        let mut best: Option<(f64, f64)> = None;
        for (ri, vi) in r.iter().zip(values) {
            if *ri >= inner && *ri < outer && best.is_none_or(|(_, s)| vi.abs() > s) {
                best = Some((*ri, vi.abs()));
            }
        }
        if let Some((at, s)) = best {
            radii.push(at);
            sups.push(s);
        }
        outer = inner;
    }
    radii.reverse();
    sups.reverse();
    (radii, sups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone_samples(f: impl Fn(f64) -> Vec<f64>, n: usize) -> Vec<Sample> {
        (1..=n)
            .map(|i| {
                let r = i as f64 / n as f64;
                Sample { rho: r, component: Some(0), derivs: f(r) }
            })
            .collect()
    }

    #[test]
    fn holder_examples() {
        let g = WeightVector::new(vec![1.7]).unwrap();
        let exact = cone_samples(|r| vec![r.powf(1.7)], 200);
        assert!((holder_norm(&exact, 0, &g).unwrap() - 1.0).abs() < 1e-14);

        let higher = cone_samples(|r| vec![r.powf(2.7)], 200);
        let n = holder_norm(&higher, 0, &g).unwrap();
        assert!(n <= 1.0 + 1e-15 && (n - 1.0).abs() < 1e-14);

        let g = WeightVector::new(vec![2.5]).unwrap();
        let s = cone_samples(|r| vec![r.powf(2.5), 2.5 * r.powf(1.5)], 50);
        assert!((holder_norm(&s, 1, &g).unwrap() - 3.5).abs() < 1e-13);
        assert!(matches!(holder_norm(&s, 2, &g), Err(Error::MissingDerivative(2))));
    }

    #[test]
    fn lp_consistency() {
        let m = 3;
        let p = 2.5;
        let samples = cone_samples(|r| vec![(3.0 * r).sin() + 0.2], 400);
        let w: Vec<f64> = samples.iter().map(|s| s.rho * s.rho / 400.0).collect();
        let g = WeightVector::new(vec![-(m as f64) / p]).unwrap();
        let weighted = sobolev_norm(&samples, &w, 0, p, &g, m).unwrap();
        let plain: f64 = samples.iter().zip(&w).map(|(s, w)| w * s.derivs[0].abs().powf(p)).sum::<f64>().powf(1.0 / p);
        assert!((weighted - plain).abs() <= 1e-12 * plain);
        let zero = cone_samples(|_| vec![0.0], 10);
        assert_eq!(sobolev_norm(&zero, &[1.0; 10], 0, 2.0, &g, m).unwrap(), 0.0);
        assert!(sobolev_norm(&zero, &[1.0; 10], 0, 0.5, &g, m).is_err());
    }

    #[test]
    fn radial_integral_oracle() {
        // u = r^a on Σ × [r0, R] with dV = r^{m−1} dr · vol(Σ), vol(Σ) = 1.
        let (m, p, a, gamma, r0, rr) = (3usize, 2.0, 1.3, 0.4, 0.01, 1.0);
        let n = 20_000;
        let h = (rr - r0) / n as f64;
        let mut samples = Vec::new();
        let mut w = Vec::new();
        for i in 0..=n {
            let r: f64 = r0 + i as f64 * h;
            let simpson = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            samples.push(Sample { rho: r, component: Some(0), derivs: vec![r.powf(a)] });
            w.push(simpson * h / 3.0 * r.powi(m as i32 - 1));
        }
        let got = sobolev_norm(&samples, &w, 0, p, &WeightVector::new(vec![gamma]).unwrap(), m).unwrap();
        let e = (a - gamma) * p;
        let exact = ((rr.powf(e) - r0.powf(e)) / e).powf(1.0 / p);
        assert!((got - exact).abs() < 1e-10 * exact, "{got} vs {exact}");
    }

    #[test]
    fn equivalence_under_radius_change() {
        let gamma = WeightVector::new(vec![1.4]).unwrap();
        let k = 1;
        let bound = 2f64.powf(gamma.max_abs() + k as f64);
        let base: Vec<(f64, Vec<f64>)> = (1..100)
            .map(|i| {
                let r = i as f64 / 100.0;
                (r, vec![r.powf(1.9) * (1.0 + r), 2.0 * r.powf(0.9)])
            })
            .collect();
        for factor in [0.5, 0.7, 1.3, 2.0] {
            let a: Vec<Sample> =
                base.iter().map(|(r, d)| Sample { rho: *r, component: Some(0), derivs: d.clone() }).collect();
            let b: Vec<Sample> = base
                .iter()
                .map(|(r, d)| Sample { rho: (r * factor).min(1.0), component: Some(0), derivs: d.clone() })
                .collect();
            let (na, nb) = (holder_norm(&a, k, &gamma).unwrap(), holder_norm(&b, k, &gamma).unwrap());
            assert!(nb / na <= bound && nb / na >= 1.0 / bound);
        }
    }

    #[test]
    fn monotone_in_weight() {
        let s = cone_samples(|r| vec![r.powf(3.0), 3.0 * r * r], 100);
        let mut last = 0.0;
        for g in [0.0, 0.5, 1.0, 2.0, 2.9] {
            let n = holder_norm(&s, 1, &WeightVector::new(vec![g]).unwrap()).unwrap();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn radius_function() {
        let rho = RadiusFunction::new(
            vec![ConeChart { center: vec![0.0, 0.0], radius: 0.5 }, ConeChart { center: vec![2.0, 0.0], radius: 0.5 }],
            1.0,
        )
        .unwrap();
        assert_eq!(rho.eval(&[0.1, 0.0]), (0.1, Some(0)));
        assert_eq!(rho.eval(&[1.0, 1.0]), (1.0, None));
        let (v, c) = rho.eval(&[2.4, 0.0]);
        assert!(v > 0.4 && v < 1.0 && c == Some(1));
        let pts: Vec<Vec<f64>> = (1..50).map(|i| vec![i as f64 / 100.0, 0.0]).collect();
        assert!(rho.chart_ratio(&pts) < 10.0);
        for i in 1..=1000 {
            let x = vec![i as f64 * 3.0 / 1000.0 + 1e-4, 0.0];
            let v = rho.eval(&x).0;
            assert!(v > 0.0 && v <= 1.0);
        }
        assert!(RadiusFunction::new(vec![ConeChart { center: vec![0.0], radius: 1.5 }], 1.0).is_err());
    }

    fn dyadic(f: impl Fn(f64) -> f64, top: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let pts = 500 * n;
        let r: Vec<f64> = (0..pts).map(|i| top * 2f64.powf(-(i as f64) / 500.0)).collect();
        let v: Vec<f64> = r.iter().map(|&x| f(x)).collect();
        dyadic_suprema(&r, &v, top / 2f64.powi(n as i32), top)
    }

    #[test]
    fn rate_examples() {
        let (r, s) = dyadic(|r| r.powf(2.5), 1.0, 8);
        let fit = decay_rate(&r, &s).unwrap();
        assert!((fit.rate - 2.5).abs() < 1e-12 && fit.std_err < 1e-12);
        let (r, s) = dyadic(|r| r.powf(2.5) + r.powi(4), 0.125, 8);
        assert!((decay_rate(&r, &s).unwrap().rate - 2.5).abs() < 0.05);
        let (r, s) = dyadic(|r| r * r, 1.0, 6);
        assert!((decay_rate(&r, &s).unwrap().rate - 2.0).abs() < 1e-12);
        let (r, s) = dyadic(|_| 0.0, 1.0, 6);
        assert!(matches!(decay_rate(&r, &s), Err(Error::DegenerateData(_))));
        assert!(decay_rate(&r[..4], &s[..4]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn rate_scale_invariant(c in -100.0f64..100.0, a in 0.1f64..4.0) {
            proptest::prop_assume!(c.abs() > 1e-3);
            let (r, s) = dyadic(|r| r.powf(a) * (1.0 + 0.1 * r), 0.5, 7);
            let (_, sc) = dyadic(|r| c * r.powf(a) * (1.0 + 0.1 * r), 0.5, 7);
            let f0 = decay_rate(&r, &s).unwrap();
            let f1 = decay_rate(&r, &sc).unwrap();
            proptest::prop_assert!((f0.rate - f1.rate).abs() < 1e-9);
        }
    }
}
