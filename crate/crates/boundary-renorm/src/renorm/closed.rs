//! Heat-kernel overlap integrals over the half space, the Robin correction
//! `𝒥⁰_a(1)` and the boundary coefficient schedule `c_ε`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::spectral::Table;
use super::Estimate;
use crate::quad::{graded_breaks, Rule};
use crate::special::{erfc, inverse_tangent_integral, normal_n};
use crate::{Error, Result};

/// Overlap `𝒥(a,b) = ∫_{t>0, x₃>0} 𝒦(t, x+a e₃) 𝒦(t, x+b e₃) dz` of two heat
/// kernels, in closed form
/// `tan⁻¹((a−b)/(a+b)) / (8π²(a−b))`.
///
/// ```
/// use boundary_renorm::renorm::scrj_closed;
/// let v = scrj_closed(1.0, 1.0).unwrap();
/// assert!((v - 1.0 / (16.0 * std::f64::consts::PI.powi(2))).abs() < 1e-15);
/// ```
pub fn scrj_closed(a: f64, b: f64) -> Result<f64> {
    atan_form(a, b, 1.0)
}

/// The same expression with the arctangent argument doubled,
/// `tan⁻¹(2(a−b)/(a+b)) / (16π²(a−b))`. It agrees with [`scrj_closed`] on
/// the diagonal only.
pub fn scrj_closed_variant(a: f64, b: f64) -> Result<f64> {
    atan_form(a, b, 2.0)
}

fn atan_form(a: f64, b: f64, m: f64) -> Result<f64> {
    let s = a + b;
    if !(s >= 0.0) {
        return Err(Error::config(format!("overlap integral needs a + b ≥ 0, got a={a}, b={b}")));
    }
    let d = a - b;
    let pref = 1.0 / (8.0 * m * PI * PI);
    if s == 0.0 {
        if d == 0.0 {
            return Err(Error::Singular);
        }
        return Ok(pref * 0.5 * PI * d.signum() / d);
    }
    let x = m * d / s;
    let ratio = if x.abs() < 1e-5 {
        // tan⁻¹(x)/x
        1.0 - x * x / 3.0
    } else {
        x.atan() / x
    };
    Ok(pref * ratio * m / s)
}

/// `𝒥(a,b)` by direct quadrature over `t > 0`, `x₃ > 0` and the two
/// transverse directions.
pub fn scrj_quadrature(a: f64, b: f64) -> Result<Estimate> {
    if !(a + b >= 0.0) {
        return Err(Error::config(format!("overlap integral needs a + b ≥ 0, got a={a}, b={b}")));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::Singular);
    }
    let coarse = scrj_quad_order(a, b, 16);
    let fine = scrj_quad_order(a, b, 24);
    let delta = (fine - coarse).abs();
    if delta > 1e-6 * fine.abs().max(1e-12) {
        return Err(Error::NonConvergence { what: format!("overlap integral at ({a}, {b})"), delta });
    }
    Ok(Estimate::new(fine, delta))
}

fn scrj_quad_order(a: f64, b: f64, order: usize) -> f64 {
    let rule = Rule::legendre(order);
    // ∫ N_4(y)² dy; transverse factor at time t is (this/√t)².
    let transverse_unit = rule.integrate(-12.0, 0.0, |y| normal_n(4.0, y).powi(2)) * 2.0;
    let c = -0.5 * (a + b);
    let mut total = 0.0;
    let mut tau = -12.0;
    while tau < 60.0 {
        total += rule.integrate(tau, tau + 1.0, |tau| {
            let t = tau.exp();
            let sigma = (2.0 * t).sqrt();
            // decay scale of the x₃-integrand from x₃ = 0
            let scale = sigma.min(t / (-c).max(1e-300));
            let x_max = (c.max(0.0) + 40.0 * sigma).max(40.0 * scale);
            let breaks = graded_breaks(0.0, x_max, 0.05 * scale, 1.6);
            let mut inner = 0.0;
            for w in breaks.windows(2) {
                inner += rule.integrate(w[0], w[1], |x| normal_n(4.0 * t, x + a) * normal_n(4.0 * t, x + b));
            }
            let transverse = transverse_unit * transverse_unit / t;
            transverse * inner * t
        });
        tau += 1.0;
    }
    total
}

/// `∫_0^∞ Erfc(1/√t) N_t(a) t⁻¹ dt`, which equals `2 tan⁻¹(a)/(πa)`.
pub fn erfc_identity_lhs(a: f64) -> f64 {
    let rule = Rule::legendre(20);
    let mut total = 0.0;
    let mut tau = -8.0;
    while tau < 90.0 {
        total += rule.integrate(tau, tau + 1.0, |tau| {
            let t = tau.exp();
            erfc(1.0 / t.sqrt()) * normal_n(t, a)
        });
        tau += 1.0;
    }
    total
}

/// `𝓘₀(s) = ∫ 2𝒦(s̲−z)𝒦(s̲−z⁰) dz` over the upper half space, by quadrature.
pub fn i0_heat(s: f64) -> Result<Estimate> {
    if !(s > 0.0) {
        return Err(Error::config(format!("distance must be positive, got {s}")));
    }
    let e = scrj_quadrature(-s, s)?;
    Ok(Estimate::new(2.0 * e.value, 2.0 * e.refinement_delta))
}

/// Closed form `𝓘₀(s) = 2𝒥(−s, s) = 1/(16πs)`.
pub fn i0_heat_closed(s: f64) -> f64 {
    1.0 / (16.0 * PI * s)
}

fn overlap_f(r: f64) -> f64 {
    // 𝒥(−1, 1+r) + 𝒥(1, 1+r)
    let first = if r == 0.0 {
        1.0 / (32.0 * PI)
    } else {
        ((2.0 + r) / r).atan() / (8.0 * PI * PI * (2.0 + r))
    };
    let x = r / (2.0 + r);
    let second = if x < 1e-5 { (1.0 - x * x / 3.0) / (2.0 + r) } else { x.atan() / r } / (8.0 * PI * PI);
    first + second
}

/// Mixed term `∫∫ A² e^{−A(r+r̄)} 𝒥(1+r, 1+r̄) dr dr̄`, reduced to one
/// dimension through `R = r + r̄`.
fn robin_square_term(big_a: f64) -> f64 {
    let rule = Rule::legendre(16);
    let breaks = graded_breaks(0.0, 60.0, 1e-2 * big_a.min(1.0), 1.5);
    let mut s = 0.0;
    for w in breaks.windows(2) {
        s += rule.integrate(w[0], w[1], |u| (-u).exp() * inverse_tangent_integral(u / (2.0 * big_a + u)));
    }
    big_a * s / (8.0 * PI * PI)
}

fn robin_cross_term(big_a: f64) -> f64 {
    let rule = Rule::legendre(16);
    let breaks = graded_breaks(0.0, 60.0, 1e-2 * big_a.min(1.0), 1.5);
    let mut s = 0.0;
    for w in breaks.windows(2) {
        s += rule.integrate(w[0], w[1], |u| (-u).exp() * overlap_f(u / big_a));
    }
    s
}

/// `𝒥⁰_a(1)`: the Robin correction to the boundary mass for coefficient `a`,
/// `a ∈ (0, ∞]`. Tends to `−2𝓘₀(1)` as `a → ∞`.
pub fn j0_of_a(a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::config(format!("Robin coefficient must be positive, got {a}")));
    }
    if a.is_infinite() {
        return Ok(-4.0 * scrj_closed(-1.0, 1.0)?);
    }
    let big_a = 3.0 * a;
    Ok(-(4.0 * robin_cross_term(big_a) - 4.0 * robin_square_term(big_a)))
}

/// `𝒥⁰_a(1)` with the double integral over `(r, r̄)` evaluated as a tensor
/// product rule. Slow; used to check [`j0_of_a`].
pub fn j0_of_a_tensor(a: f64) -> Result<f64> {
    let big_a = 3.0 * a;
    let rule = Rule::legendre(24);
    let breaks = graded_breaks(0.0, 60.0, 1e-2 * big_a.min(1.0), 1.5);
    let mut nodes = Vec::new();
    for w in breaks.windows(2) {
        nodes.extend(rule.mapped(w[0], w[1]));
    }
    let mut double = 0.0;
    for &(u, wu) in &nodes {
        for &(v, wv) in &nodes {
            double += wu * wv * (-(u + v)).exp() * scrj_closed(1.0 + u / big_a, 1.0 + v / big_a)?;
        }
    }
    Ok(-(4.0 * robin_cross_term(big_a) - 4.0 * double))
}

fn j0_table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| Table::uniform(J0_LOG_MIN, 16.0, 0.01, |la| j0_of_a(la.exp()).unwrap_or(f64::NAN)))
}

const J0_LOG_MIN: f64 = -40.0;

/// `𝒥⁰_a(1)` through a cached table in `log a`. Below `a = e^{-40}` the
/// leading small-`a` term `−(3a/4π) log(1/3a)` is returned.
pub fn j0_interp(a: f64) -> Result<f64> {
    if a > 0.0 {
        let la = a.ln();
        if la < J0_LOG_MIN {
            return Ok(-(3.0 * a / (4.0 * PI)) * (1.0 / (3.0 * a)).ln());
        }
        if let Some(v) = j0_table().eval_in(la) {
            return Ok(v);
        }
    }
    j0_of_a(a)
}

/// `∫_{ln lo}^{ln hi} 𝒥⁰_{e^σ}(1) dσ = ∫_{lo/c}^{hi/c} (1/s) 𝒥⁰_{sc}(1) ds`.
pub(crate) fn j0_log_integral(lo: f64, hi: f64) -> Result<f64> {
    if hi < lo {
        return Ok(-j0_log_integral(hi, lo)?);
    }
    let rule = Rule::legendre(12);
    let (a, b) = (lo.ln(), hi.ln());
    let panels = ((b - a) / 0.25).ceil().max(1.0) as usize;
    let mut s = 0.0;
    for p in 0..panels {
        let x0 = a + (b - a) * p as f64 / panels as f64;
        let x1 = a + (b - a) * (p + 1) as f64 / panels as f64;
        for (x, w) in rule.mapped(x0, x1) {
            s += w * j0_interp(x.exp())?;
        }
    }
    Ok(s)
}

/// The map `f(c) = c − ∫_{K/c}^1 (1/s) 𝒥⁰_{sc}(1) ds`.
pub fn f_of_c(c: f64, k: f64) -> Result<f64> {
    if !(c > 0.0 && k > 0.0) {
        return Err(Error::config("f(c) needs c > 0 and K > 0"));
    }
    Ok(c - j0_log_integral(k, c)?)
}

/// Smallest `K` on a logarithmic grid such that `𝒥⁰_a(1)` stays within
/// `[−3𝓘₀(1), −𝓘₀(1)]` for every sampled `a ≥ K`.
pub fn choose_k() -> Result<f64> {
    let i0 = i0_heat_closed(1.0);
    let grid: Vec<f64> = (0..=300).map(|i| 10f64.powf(-3.0 + 0.03 * i as f64)).collect();
    let mut k = None;
    for &a in grid.iter().rev() {
        let v = j0_interp(a)?;
        if v <= -i0 && v >= -3.0 * i0 {
            k = Some(a);
        } else {
            break;
        }
    }
    k.ok_or_else(|| Error::Bracket("no K with 𝒥⁰ inside [−3𝓘₀, −𝓘₀]".into()))
}

/// Check the `K` window property on a grid above `k`.
pub fn check_k(k: f64) -> Result<()> {
    let i0 = i0_heat_closed(1.0);
    for i in 0..=200 {
        let a = k * 10f64.powf(0.04 * i as f64);
        let v = j0_interp(a)?;
        if v > -i0 || v < -3.0 * i0 {
            return Err(Error::config(format!(
                "K = {k} violates the window: 𝒥⁰ at a = {a:.3e} is {v:.6e}"
            )));
        }
    }
    Ok(())
}

/// Limit of `|log ε| 𝓘₀(1) − b_ε`. Serialised as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TargetRepr", into = "TargetRepr")]
pub enum Target {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TargetRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<TargetRepr> for Target {
    type Error = Error;
    fn try_from(r: TargetRepr) -> Result<Self> {
        match r {
            TargetRepr::Number(b) => Ok(Target::Finite(b)),
            TargetRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Target> for TargetRepr {
    fn from(t: Target) -> Self {
        match t {
            Target::Finite(b) => TargetRepr::Number(b),
            Target::Infinite => TargetRepr::Text("inf".into()),
        }
    }
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" | "∞" => Ok(Target::Infinite),
            other => other
                .parse::<f64>()
                .map(Target::Finite)
                .map_err(|_| Error::config(format!("target b must be a number or 'inf', got '{other}'"))),
        }
    }
}

/// Boundary coefficients along an ε ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CSchedule {
    pub eps: Vec<f64>,
    pub b_eps: Vec<f64>,
    pub c_eps: Vec<f64>,
    /// Remainder `d_ε` closing `b_ε + c_ε + d_ε = 𝓘₀|log ε| + ∫_ε^1 s⁻¹𝒥⁰_{sc_ε}(1) ds`.
    pub d_eps: Vec<f64>,
    pub k: f64,
    /// Coefficient of `|log ε|`.
    pub log_coefficient: f64,
}

/// Solve for `c_ε`. With a finite target `c_ε ≡ b`; otherwise
/// `c_ε = f⁻¹(𝓘₀(1)|log ε| − b_ε)` by bisection.
pub fn c_epsilon(eps: &[f64], b_eps: &[f64], target: Target, k: Option<f64>) -> Result<CSchedule> {
    c_epsilon_with(eps, b_eps, target, k, i0_heat_closed(1.0))
}

/// [`c_epsilon`] with an explicit coefficient in front of `|log ε|`.
pub fn c_epsilon_with(
    eps: &[f64],
    b_eps: &[f64],
    target: Target,
    k: Option<f64>,
    log_coefficient: f64,
) -> Result<CSchedule> {
    if eps.len() != b_eps.len() || eps.is_empty() {
        return Err(Error::config("ε ladder and b_ε ladder must have the same non-zero length"));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::config("ε ladder must lie in (0,1] and strictly decrease"));
    }
    let products: Vec<f64> = eps.iter().zip(b_eps).map(|(e, b)| (e * b).abs()).collect();
    if products.windows(2).any(|w| w[1] > w[0] + 1e-15) {
        return Err(Error::config("ε·b_ε must decrease along the ladder"));
    }
    let k = match k {
        Some(k) => {
            check_k(k)?;
            k
        }
        None => choose_k()?,
    };
    let mut c_eps = Vec::with_capacity(eps.len());
    let mut d_eps = Vec::with_capacity(eps.len());
    for (&e, &b) in eps.iter().zip(b_eps) {
        let rhs = log_coefficient * e.ln().abs() - b;
        let c = match target {
            Target::Finite(v) => v,
            Target::Infinite => invert_f(rhs, k)?,
        };
        let tail = if c > 0.0 { j0_log_integral(e * c, c)? } else { 0.0 };
        c_eps.push(c);
        d_eps.push(rhs + tail - c);
    }
    Ok(CSchedule { eps: eps.to_vec(), b_eps: b_eps.to_vec(), c_eps, d_eps, k, log_coefficient })
}

fn invert_f(value: f64, k: f64) -> Result<f64> {
    // f(K) = K and f(c) ≥ c above K
    let mut lo = k;
    let mut hi = value;
    if !(value > k) {
        return Err(Error::Bracket(format!("f(c) = {value} has no solution above K = {k}")));
    }
    if f_of_c(hi, k)? < value {
        return Err(Error::Bracket(format!("f({hi}) below target {value}")));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f_of_c(mid, k)? < value {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_special_values() {
        let p = PI;
        assert!((scrj_closed(1.0, -1.0).unwrap() - 1.0 / (32.0 * p)).abs() < 1e-15);
        assert!((scrj_closed(3.0, 1.0).unwrap() - 0.5f64.atan() / (16.0 * p * p)).abs() < 1e-15);
        assert!((scrj_closed_variant(1.0, -1.0).unwrap() - 1.0 / (64.0 * p)).abs() < 1e-15);
        let near = scrj_closed(1.0 + 1e-9, 1.0).unwrap();
        assert!((near - 1.0 / (16.0 * p * p)).abs() < 1e-11);
        assert!(scrj_closed(-2.0, 1.0).is_err());
        assert!(scrj_closed(0.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_is_symmetric() {
        for &(a, b) in &[(0.3, 2.0), (5.0, -1.0), (1.5, 1.5)] {
            let x = scrj_closed(a, b).unwrap();
            let y = scrj_closed(b, a).unwrap();
            assert!((x - y).abs() < 1e-16);
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for &(a, b) in &[(1.0, -1.0), (1.0, 1.0), (3.0, 1.0), (0.2, 4.0), (2.0, -0.5)] {
            let q = scrj_quadrature(a, b).unwrap().value;
            let c = scrj_closed(a, b).unwrap();
            assert!(((q - c) / c).abs() < 1e-6, "({a},{b}): {q} vs {c}");
        }
    }

    #[test]
    fn erfc_identity_values() {
        for &a in &[0.5, 1.0, 2.0, 7.0] {
            let rhs = 2.0 * f64::atan(a) / (PI * a);
            assert!((erfc_identity_lhs(a) - rhs).abs() < 1e-9, "a={a}");
        }
        assert!((erfc_identity_lhs(1e-8) - 2.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn i0_quadrature_scales_like_inverse_distance() {
        for &s in &[0.25, 1.0, 3.0] {
            let v = i0_heat(s).unwrap().value;
            assert!((v * 16.0 * PI * s - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn j0_reduction_matches_tensor_rule() {
        for &a in &[0.01, 0.3, 4.0] {
            let x = j0_of_a(a).unwrap();
            let y = j0_of_a_tensor(a).unwrap();
            assert!((x - y).abs() < 1e-7 * x.abs().max(1e-3), "a={a}: {x} vs {y}");
        }
    }

    #[test]
    fn j0_limits() {
        let inf = j0_of_a(f64::INFINITY).unwrap();
        assert!((inf + 2.0 * i0_heat_closed(1.0)).abs() < 1e-15);
        let big = j0_of_a(1e4).unwrap();
        assert!(((big - inf) / inf).abs() < 1e-3);
        assert!(j0_of_a(1e-4).unwrap().abs() < 1e-3);
        assert!(j0_of_a(0.0).is_err());
    }

    #[test]
    fn small_a_asymptote_is_approached() {
        let a = 1e-12;
        let lead = -(3.0 * a / (4.0 * PI)) * (1.0 / (3.0 * a)).ln();
        let v = j0_of_a(a).unwrap();
        assert!(((v - lead) / lead).abs() < 0.1, "{v} vs {lead}");
    }

    #[test]
    fn interpolated_j0_is_accurate() {
        for &a in &[0.0123, 0.77, 31.0] {
            assert!((j0_interp(a).unwrap() - j0_of_a(a).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn finite_target_returns_constant_schedule() {
        let eps = [0.25, 0.125, 0.0625];
        let s = c_epsilon(&eps, &[0.0; 3], Target::Finite(0.7), None).unwrap();
        assert!(s.c_eps.iter().all(|&c| c == 0.7));
        assert!(s.d_eps.iter().all(|d| d.is_finite()));
    }

    #[test]
    fn k_window_and_f_bound() {
        let k = choose_k().unwrap();
        assert!(k > 0.01 && k < 1.0, "K = {k}");
        check_k(k).unwrap();
        assert!(check_k(1e-3).is_err());
        for &c in &[1.0, 2.0, 10.0, 100.0] {
            assert!(f_of_c(c, k).unwrap() >= c);
        }
        assert_eq!(f_of_c(k, k).unwrap(), k);
    }

    #[test]
    fn infinite_target_inverts_f() {
        let eps: Vec<f64> = [200, 400, 800].iter().map(|&n| 2f64.powi(-n)).collect();
        let s = c_epsilon(&eps, &[0.0; 3], Target::Infinite, None).unwrap();
        for (i, &e) in eps.iter().enumerate() {
            let rhs = i0_heat_closed(1.0) * e.ln().abs();
            let back = f_of_c(s.c_eps[i], s.k).unwrap();
            assert!((back - rhs).abs() < 1e-9);
            assert!(s.c_eps[i] < rhs);
        }
    }

    #[test]
    fn target_parses() {
        assert_eq!("inf".parse::<Target>().unwrap(), Target::Infinite);
        assert_eq!("0.5".parse::<Target>().unwrap(), Target::Finite(0.5));
        assert!("x".parse::<Target>().is_err());
    }
}
