//! Clayton copula: Archimedean generator, distribution function, density and
//! the Kendall's tau conversions used to calibrate the dependence parameter.
//!
//! For `theta` at or below [`INDEPENDENCE_THRESHOLD`] every function routes to
//! the closed-form independence limit (`-ln t`, `exp(-z)`, `u v`, density 1).
//! The removable limit is numerically unstable when evaluated through the
//! general formulas.

use crate::error::{Error, Result};

/// Dependence parameters at or below this value are treated as independence.
pub const INDEPENDENCE_THRESHOLD: f64 = 1e-6;

/// Clayton dependence parameter, `theta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ClaytonTheta(f64);

impl ClaytonTheta {
    /// The independence copula, pinned at the threshold value.
    pub const INDEPENDENT: ClaytonTheta = ClaytonTheta(INDEPENDENCE_THRESHOLD);

    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::Domain(format!(
                "Clayton theta must be finite and >= 0, got {theta}"
            )));
        }
        Ok(Self(theta))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True when the parameter is small enough to be handled as independence.
    #[inline]
    pub fn is_independent(self) -> bool {
        self.0 <= INDEPENDENCE_THRESHOLD
    }
}

impl TryFrom<f64> for ClaytonTheta {
    type Error = Error;

    fn try_from(theta: f64) -> Result<Self> {
        Self::new(theta)
    }
}

/// A point of the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPair {
    pub u: f64,
    pub v: f64,
}

impl UnitPair {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!(
                "unit pair coordinates must lie in [0, 1], got ({u}, {v})"
            )));
        }
        Ok(Self { u, v })
    }

    fn require_interior(self) -> Result<()> {
        if self.u <= 0.0 || self.u >= 1.0 || self.v <= 0.0 || self.v >= 1.0 {
            return Err(Error::Boundary(format!(
                "copula density is undefined on the boundary, got ({}, {})",
                self.u, self.v
            )));
        }
        Ok(())
    }
}

/// Archimedean generator `phi(t) = (t^-theta - 1) / theta`.
pub fn generator(t: f64, theta: ClaytonTheta) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!(
            "generator argument must lie in (0, 1], got {t}"
        )));
    }
    let ln_t = t.ln();
    if theta.is_independent() {
        return Ok(-ln_t);
    }
    let th = theta.value();
    Ok((-th * ln_t).exp_m1() / th)
}

/// Pseudo-inverse of the generator. For Clayton `phi(0) = inf`, so this is the
/// ordinary inverse `(1 + theta z)^(-1/theta)`.
pub fn generator_pseudo_inverse(z: f64, theta: ClaytonTheta) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain(format!(
            "pseudo-inverse argument must be >= 0, got {z}"
        )));
    }
    if theta.is_independent() {
        return Ok((-z).exp());
    }
    let th = theta.value();
    Ok((-(th * z).ln_1p() / th).exp())
}

/// `ln(u^-theta + v^-theta - 1)` from `ln u`, `ln v`, without overflow for
/// tiny margins and without cancellation near `u = v = 1`.
#[inline]
fn ln_clayton_sum(theta: f64, ln_u: f64, ln_v: f64) -> f64 {
    let a = -theta * ln_u;
    let b = -theta * ln_v;
    let m = a.max(b);
    if m < 1.0 {
        (a.exp_m1() + b.exp_m1()).ln_1p()
    } else {
        m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln()
    }
}

/// Clayton distribution function `C(u, v) = (u^-theta + v^-theta - 1)^(-1/theta)`.
pub fn clayton_cdf(p: UnitPair, theta: ClaytonTheta) -> f64 {
    let UnitPair { u, v } = p;
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    if u == 1.0 {
        return v;
    }
    if v == 1.0 {
        return u;
    }
    if theta.is_independent() {
        return u * v;
    }
    let th = theta.value();
    (-ln_clayton_sum(th, u.ln(), v.ln()) / th).exp()
}

/// Log of the Clayton density, computed term by term.
pub fn log_clayton_density(p: UnitPair, theta: ClaytonTheta) -> Result<f64> {
    p.require_interior()?;
    Ok(log_density_from_logs(p.u.ln(), p.v.ln(), theta))
}

/// Log-density from `ln u` and `ln v`; callers that already hold the margins in
/// log form (the likelihood integrand) skip a round trip through `exp`.
#[inline]
pub(crate) fn log_density_from_logs(ln_u: f64, ln_v: f64, theta: ClaytonTheta) -> f64 {
    if theta.is_independent() {
        return 0.0;
    }
    let th = theta.value();
    th.ln_1p() - (th + 1.0) * (ln_u + ln_v) - (2.0 + 1.0 / th) * ln_clayton_sum(th, ln_u, ln_v)
}

/// Clayton density `c(u, v)`, the mixed second derivative of [`clayton_cdf`].
pub fn clayton_density(p: UnitPair, theta: ClaytonTheta) -> Result<f64> {
    log_clayton_density(p, theta).map(f64::exp)
}

/// Conditional density of `V` given `U = u` on the uniform scale. Both margins
/// are uniform, so this is the copula density itself.
pub fn conditional_v_given_u(u: f64, v: f64, theta: ClaytonTheta) -> Result<f64> {
    clayton_density(UnitPair::new(u, v)?, theta)
}

/// Conditional distribution function `P(V <= v | U = u) = dC/du`.
pub fn conditional_cdf_v_given_u(u: f64, v: f64, theta: ClaytonTheta) -> Result<f64> {
    let p = UnitPair::new(u, v)?;
    if u == 0.0 || u == 1.0 {
        return Err(Error::Boundary(format!(
            "conditioning value must lie in (0, 1), got {u}"
        )));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    if v == 1.0 || theta.is_independent() {
        return Ok(v);
    }
    let th = theta.value();
    let (ln_u, ln_v) = (p.u.ln(), p.v.ln());
    Ok((-(th + 1.0) * ln_u - (1.0 / th + 1.0) * ln_clayton_sum(th, ln_u, ln_v)).exp())
}

/// `ln(1 + (v^-theta - 1) u^theta)`, the shared term of the conditional
/// distribution function written as `(1 + x)^-(1 + 1/theta)`.
#[inline]
fn ln_one_plus_x(ln_u: f64, ln_v: f64, th: f64) -> f64 {
    ((-th * ln_v).exp_m1() * (th * ln_u).exp()).ln_1p()
}

/// `P(V <= v | U = u)` from `ln u`, `ln v`.
#[inline]
pub(crate) fn conditional_cdf_from_logs(ln_u: f64, ln_v: f64, theta: ClaytonTheta) -> f64 {
    if theta.is_independent() {
        return ln_v.exp();
    }
    let th = theta.value();
    (-(1.0 + 1.0 / th) * ln_one_plus_x(ln_u, ln_v, th)).exp()
}

/// `P(V > v | U = u)` from `ln u`, `ln v`, accurate in the upper tail.
#[inline]
pub(crate) fn conditional_survival_from_logs(ln_u: f64, ln_v: f64, theta: ClaytonTheta) -> f64 {
    if theta.is_independent() {
        return -ln_v.exp_m1();
    }
    let th = theta.value();
    -(-(1.0 + 1.0 / th) * ln_one_plus_x(ln_u, ln_v, th)).exp_m1()
}

/// Kendall's tau implied by a Clayton parameter, `theta / (theta + 2)`.
pub fn tau_from_theta(theta: ClaytonTheta) -> f64 {
    let th = theta.value();
    th / (th + 2.0)
}

/// Clayton parameter matching a concordance level, `2 tau / (1 - tau)`.
///
/// Clayton cannot represent negative dependence, so callers holding an
/// empirical tau must clamp it into `[0, 1)` first.
pub fn theta_from_tau(tau: f64) -> Result<ClaytonTheta> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Domain(format!(
            "Clayton requires 0 <= tau < 1, got {tau}"
        )));
    }
    ClaytonTheta::new(2.0 * tau / (1.0 - tau))
}

/// Sample Kendall's tau-a: `(concordant - discordant) / (n choose 2)`.
///
/// Pairs tied in either coordinate count as neither concordant nor discordant.
/// Runs in `O(n log n)` (Knight's merge-sort count of discordant pairs).
pub fn empirical_kendall_tau(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::Invalid(format!(
            "Kendall's tau needs at least 2 pairs, got {n}"
        )));
    }
    if pairs.iter().any(|(x, y)| x.is_nan() || y.is_nan()) {
        return Err(Error::Invalid("Kendall's tau input contains NaN".into()));
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let total = (n as u64) * (n as u64 - 1) / 2;
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            run_x += 1;
            if w[0].1 == w[1].1 {
                run_xy += 1;
            } else {
                ties_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            ties_x += run_x * (run_x - 1) / 2;
            ties_xy += run_xy * (run_xy - 1) / 2;
            run_x = 1;
            run_xy = 1;
        }
    }
    ties_x += run_x * (run_x - 1) / 2;
    ties_xy += run_xy * (run_xy - 1) / 2;

    let mut ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let discordant = merge_count(&mut ys, &mut buf);

    let mut ties_y = 0u64;
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            ties_y += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    ties_y += run_y * (run_y - 1) / 2;

    let concordant_minus_discordant =
        total as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * discordant as f64;
    Ok(concordant_minus_discordant / total as f64)
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (lo, hi) = v.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        merge_count(lo, blo) + merge_count(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn th(x: f64) -> ClaytonTheta {
        ClaytonTheta::new(x).unwrap()
    }

    fn brute_tau(pairs: &[(f64, f64)]) -> f64 {
        let n = pairs.len();
        let mut s = 0i64;
        for i in 0..n {
            for j in i + 1..n {
                let dx = pairs[i].0 - pairs[j].0;
                let dy = pairs[i].1 - pairs[j].1;
                let p = dx * dy;
                if p > 0.0 {
                    s += 1;
                } else if p < 0.0 {
                    s -= 1;
                }
            }
        }
        s as f64 / (n * (n - 1) / 2) as f64
    }

    #[test]
    fn rejects_negative_theta() {
        assert!(ClaytonTheta::new(-0.5).is_err());
        assert!(ClaytonTheta::new(f64::NAN).is_err());
        assert!(ClaytonTheta::new(0.0).unwrap().is_independent());
        assert!(!th(1e-5).is_independent());
    }

    #[test]
    fn generator_values() {
        assert_eq!(generator(1.0, th(2.0)).unwrap(), 0.0);
        assert_relative_eq!(generator(0.5, th(2.0)).unwrap(), 1.5, epsilon = 1e-14);
        assert_relative_eq!(generator(0.25, th(0.0)).unwrap(), 4f64.ln(), epsilon = 1e-14);
        assert!(generator(0.0, th(2.0)).is_err());
        assert!(generator(1.5, th(2.0)).is_err());
    }

    #[test]
    fn pseudo_inverse_values() {
        assert_eq!(generator_pseudo_inverse(0.0, th(2.0)).unwrap(), 1.0);
        assert_relative_eq!(generator_pseudo_inverse(1.5, th(2.0)).unwrap(), 0.5, epsilon = 1e-14);
        assert!(generator_pseudo_inverse(-1.0, th(2.0)).is_err());
    }

    #[test]
    fn cdf_values() {
        let p = |u, v| UnitPair::new(u, v).unwrap();
        assert_eq!(clayton_cdf(p(0.7, 1.0), th(3.0)), 0.7);
        assert_eq!(clayton_cdf(p(1.0, 0.2), th(3.0)), 0.2);
        assert_eq!(clayton_cdf(p(0.0, 0.2), th(3.0)), 0.0);
        assert_relative_eq!(clayton_cdf(p(0.5, 0.5), th(2.0)), 7f64.powf(-0.5), epsilon = 1e-14);
        assert_relative_eq!(clayton_cdf(p(0.3, 0.8), th(0.0)), 0.24, epsilon = 1e-15);
    }

    #[test]
    fn density_values() {
        let p = UnitPair::new(0.5, 0.5).unwrap();
        assert_eq!(clayton_density(p, th(0.0)).unwrap(), 1.0);
        assert_relative_eq!(
            clayton_density(p, th(2.0)).unwrap(),
            192.0 / 7f64.powf(2.5),
            max_relative = 1e-13
        );
        let edge = UnitPair::new(0.0, 0.5).unwrap();
        assert!(matches!(clayton_density(edge, th(2.0)), Err(Error::Boundary(_))));
        let edge = UnitPair::new(0.5, 1.0).unwrap();
        assert!(matches!(log_clayton_density(edge, th(2.0)), Err(Error::Boundary(_))));
    }

    #[test]
    fn conditional_density_matches_copula_density() {
        assert_relative_eq!(
            conditional_v_given_u(0.5, 0.5, th(2.0)).unwrap(),
            192.0 / 7f64.powf(2.5),
            max_relative = 1e-13
        );
        for &(u, v) in &[(0.1, 0.9), (0.5, 0.2), (0.99, 0.01)] {
            assert_eq!(conditional_v_given_u(u, v, th(0.0)).unwrap(), 1.0);
        }
    }

    #[test]
    fn density_survives_extreme_margins() {
        let p = UnitPair::new(1e-300, 1e-300).unwrap();
        let ld = log_clayton_density(p, th(5.0)).unwrap();
        assert!(ld.is_finite());
        let p = UnitPair::new(1.0 - 1e-15, 1e-12).unwrap();
        assert!(log_clayton_density(p, th(5.0)).unwrap().is_finite());
    }

    #[test]
    fn tau_conversions() {
        assert_eq!(tau_from_theta(th(0.0)), 0.0);
        assert_relative_eq!(tau_from_theta(th(1.5)), 3.0 / 7.0, epsilon = 1e-15);
        assert_eq!(tau_from_theta(th(2.0)), 0.5);
        assert_relative_eq!(theta_from_tau(3.0 / 7.0).unwrap().value(), 1.5, epsilon = 1e-9);
        assert_eq!(theta_from_tau(0.0).unwrap().value(), 0.0);
        assert_eq!(theta_from_tau(0.5).unwrap().value(), 2.0);
        assert!(theta_from_tau(1.0).is_err());
        assert!(theta_from_tau(-0.1).is_err());
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(empirical_kendall_tau(&[(1., 1.), (2., 2.), (3., 3.)]).unwrap(), 1.0);
        assert_eq!(empirical_kendall_tau(&[(1., 3.), (2., 2.), (3., 1.)]).unwrap(), -1.0);
        assert_relative_eq!(
            empirical_kendall_tau(&[(1., 2.), (2., 1.), (3., 3.)]).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        assert!(empirical_kendall_tau(&[(1., 1.)]).is_err());
    }

    #[test]
    fn kendall_ties_count_as_neither() {
        let pairs = [(1., 1.), (1., 2.), (2., 2.), (3., 1.), (3., 1.)];
        assert_relative_eq!(
            empirical_kendall_tau(&pairs).unwrap(),
            brute_tau(&pairs),
            epsilon = 1e-15
        );
    }

    proptest! {
        #[test]
        fn kendall_matches_brute_force(
            pairs in prop::collection::vec((0i32..6, 0i32..6), 2..40)
        ) {
            let pairs: Vec<(f64, f64)> = pairs.into_iter().map(|(a, b)| (a as f64, b as f64)).collect();
            let fast = empirical_kendall_tau(&pairs).unwrap();
            prop_assert!((fast - brute_tau(&pairs)).abs() < 1e-12);
        }

        #[test]
        fn generator_round_trip(x in 1e-6f64..=1.0, theta in prop::sample::select(vec![0.0, 0.1, 1.0, 1.5, 5.0])) {
            let t = th(theta);
            let back = generator_pseudo_inverse(generator(x, t).unwrap(), t).unwrap();
            prop_assert!((back - x).abs() <= 1e-12);
        }

        #[test]
        fn tau_theta_bijection(tau in 0.0f64..0.99) {
            let back = tau_from_theta(theta_from_tau(tau).unwrap());
            prop_assert!((back - tau).abs() <= 1e-12);
        }
    }

    #[test]
    fn conditional_survival_complements_the_cdf() {
        for &th in &[1e-7, 0.5, 1.5, 5.0] {
            let theta = ClaytonTheta::new(th).unwrap();
            for &(u, v) in &[(0.2f64, 0.3f64), (0.5, 0.5), (0.9, 0.05), (0.01, 0.99)] {
                let cdf = conditional_cdf_from_logs(u.ln(), v.ln(), theta);
                let sv = conditional_survival_from_logs(u.ln(), v.ln(), theta);
                assert_relative_eq!(cdf + sv, 1.0, epsilon = 1e-14);
                assert_relative_eq!(cdf, conditional_cdf_v_given_u(u, v, theta).unwrap(), max_relative = 1e-12);
            }
        }
        // deep upper tail: 1 - v = 1e-20, survival stays positive and proportional
        let theta = ClaytonTheta::new(1.5).unwrap();
        let ln_v = (-1e-20f64).ln_1p();
        let sv = conditional_survival_from_logs(0.5f64.ln(), ln_v, theta);
        // d/dv of the conditional cdf at v = 1 is c(u, 1) = (1 + theta) u^theta
        assert_relative_eq!(sv, 1e-20 * 2.5 * 0.5f64.powf(1.5), max_relative = 1e-6);
    }
}
