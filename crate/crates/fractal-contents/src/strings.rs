//! One-dimensional fractal strings: a compact subset of the line described
//! by the multiset of its complementary gap lengths `l_1 >= l_2 >= ...`
//! (plus the two endpoints of the surrounding interval).
//!
//! All quantities of interest reduce to exact arithmetic over the distinct
//! gap lengths and their multiplicities:
//!
//! * the counting function `N(x) = #{j : 1/l_j <= x}` (inclusive at jumps);
//! * the boundary-count basic function
//!   `beta0(t) = 1 + #{j : l_j > 2t}` (strict, hence right-continuous);
//! * the tube volume `V(A_eps \ A)` by two independent routes: integrating
//!   `beta0` piecewise over its breakpoints `l_j / 2`, and the direct gap
//!   bookkeeping `2 eps + 2 eps N(1/(2 eps)) + sum_{l_j < 2 eps} l_j`;
//! * one-sided derivatives of the tube volume;
//! * the geometric zeta function `sum_j l_j^s` by three routes (Dirichlet
//!   series, Mellin transform of `N`, and the boundary-count integral
//!   transform) that must agree on the common half-plane of convergence.
//!
//! Rule-backed strings (ternary-Cantor-like constructions and general
//! geometric cascades) supply closed-form tails, so truncation never
//! enters the results; explicit finite strings are summed outright.
//!
//! Floating-point tie handling: breakpoint comparisons classify a length
//! as equal to a threshold when they agree to 1e-12 relative precision
//! ([`LENGTH_TIE_TOL`]), which makes the inclusive/strict conventions at
//! jump points robust against round-off in caller-computed thresholds.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for classifying a gap length as exactly equal to a
/// comparison threshold (jump-point semantics).
pub const LENGTH_TIE_TOL: f64 = 1e-12;

/// Number of leading distinct lengths summed explicitly before switching
/// to the rule's closed-form tail in series evaluations.
const SERIES_HEAD: usize = 48;

/// Generation rule for the gap lengths of a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum StringRule {
    /// Middle-third construction: lengths `3^-k` with multiplicity `2^(k-1)`.
    Cantor,
    /// Middle-`1/a` construction on `[0,1]`: lengths `a^-k` with
    /// multiplicity `2^(k-1)`; requires `a > 3` so the remainder has
    /// positive measure.
    Svc { a: f64 },
    /// General geometric cascade: lengths `ratio^k` with multiplicity
    /// `mult^(k-1)`; requires `mult * ratio < 1` (finite total length).
    Geometric { ratio: f64, mult: u32 },
    /// Explicit finite multiset of gap lengths.
    Explicit { lengths: Vec<f64> },
}

/// A fractal string: distinct decreasing gap lengths with multiplicities,
/// backed either by a closed-form rule or an explicit finite list.
#[derive(Debug, Clone)]
pub struct FractalString {
    rule: StringRule,
    /// Explicit strings normalized to distinct `(length, multiplicity)`
    /// pairs in strictly decreasing length order; empty for rule strings.
    distinct: Vec<(f64, f64)>,
}

/// The three independent evaluations of the geometric zeta function at one
/// argument, plus their largest pairwise disagreement.
#[derive(Debug, Clone, Copy)]
pub struct ZetaValues {
    /// Dirichlet series `sum_j l_j^s` (head + closed-form tail).
    pub dirichlet: Complex64,
    /// Mellin route `s * int_0^inf x^(-s-1) N(x) dx`.
    pub mellin: Complex64,
    /// Boundary-count route
    /// `-(2 eps)^s + 2^s s int_0^eps t^(s-1) beta0(t) dt`.
    pub functional: Complex64,
}

impl ZetaValues {
    /// Largest modulus of a pairwise difference between the three routes.
    pub fn max_pairwise_residual(&self) -> f64 {
        let dm = (self.dirichlet - self.mellin).norm();
        let df = (self.dirichlet - self.functional).norm();
        let mf = (self.mellin - self.functional).norm();
        dm.max(df).max(mf)
    }
}

/// Three-way classification of a gap length against a threshold with the
/// crate-wide relative tie tolerance.
fn classify(len: f64, threshold: f64) -> Ordering {
    if (len - threshold).abs() <= LENGTH_TIE_TOL * len.abs().max(threshold.abs()) {
        Ordering::Equal
    } else if len > threshold {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

impl FractalString {
    /// Middle-third Cantor string (gap lengths `3^-k`, multiplicities
    /// `2^(k-1)`, total length 1).
    pub fn cantor() -> Self {
        FractalString { rule: StringRule::Cantor, distinct: Vec::new() }
    }

    /// Smith–Volterra-style string with scale factor `a > 3`: at stage `k`,
    /// `2^(k-1)` gaps of length `a^-k` are removed from `[0, 1]`, leaving a
    /// remainder set of positive measure `1 - 1/(a - 2)`.
    pub fn svc(a: f64) -> Result<Self> {
        if !a.is_finite() || a <= 3.0 {
            return Err(Error::Domain(format!(
                "svc construction requires scale a > 3, got {a}"
            )));
        }
        Ok(FractalString { rule: StringRule::Svc { a }, distinct: Vec::new() })
    }

    /// Geometric cascade with lengths `ratio^k` and multiplicities
    /// `mult^(k-1)`; requires `0 < ratio < 1`, `mult >= 1`, and
    /// `mult * ratio < 1` so the total length is finite.
    pub fn geometric(ratio: f64, mult: u32) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) || mult < 1 {
            return Err(Error::Domain(format!(
                "geometric string requires 0 < ratio < 1 and mult >= 1, \
                 got ratio {ratio}, mult {mult}"
            )));
        }
        if mult as f64 * ratio >= 1.0 {
            return Err(Error::Domain(format!(
                "geometric string requires mult * ratio < 1 for a finite \
                 total length, got {} * {} = {}",
                mult,
                ratio,
                mult as f64 * ratio
            )));
        }
        Ok(FractalString { rule: StringRule::Geometric { ratio, mult }, distinct: Vec::new() })
    }

    /// Explicit finite string from a (possibly repeated, unordered) list of
    /// positive gap lengths.
    pub fn explicit(lengths: &[f64]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::Domain("explicit string needs at least one gap".into()));
        }
        let mut sorted: Vec<f64> = lengths.to_vec();
        for &l in &sorted {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::Domain(format!(
                    "explicit string lengths must be positive and finite, got {l}"
                )));
            }
        }
        sorted.sort_by(|x, y| y.total_cmp(x));
        let mut distinct: Vec<(f64, f64)> = Vec::new();
        for l in sorted {
            match distinct.last_mut() {
                Some((v, w)) if *v == l => *w += 1.0,
                _ => distinct.push((l, 1.0)),
            }
        }
        Ok(FractalString {
            rule: StringRule::Explicit { lengths: lengths.to_vec() },
            distinct,
        })
    }

    /// Build from a rule value (validating parameters).
    pub fn from_rule(rule: StringRule) -> Result<Self> {
        match rule {
            StringRule::Cantor => Ok(Self::cantor()),
            StringRule::Svc { a } => Self::svc(a),
            StringRule::Geometric { ratio, mult } => Self::geometric(ratio, mult),
            StringRule::Explicit { lengths } => Self::explicit(&lengths),
        }
    }

    /// Parse the JSON rule document, e.g. `{"rule":"svc","a":4}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let rule: StringRule =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_rule(rule)
    }

    /// The defining rule.
    pub fn rule(&self) -> &StringRule {
        &self.rule
    }

    /// `(ratio, mult)` view of the rule strings; `None` for explicit.
    fn cascade(&self) -> Option<(f64, f64)> {
        match self.rule {
            StringRule::Cantor => Some((1.0 / 3.0, 2.0)),
            StringRule::Svc { a } => Some((1.0 / a, 2.0)),
            StringRule::Geometric { ratio, mult } => Some((ratio, mult as f64)),
            StringRule::Explicit { .. } => None,
        }
    }

    /// `k`-th distinct gap `(length, multiplicity)`, 1-based; `None` past
    /// the end of an explicit string (rule strings never end).
    fn distinct_at(&self, k: usize) -> Option<(f64, f64)> {
        debug_assert!(k >= 1);
        match self.cascade() {
            Some((r, m)) => {
                let len = r.powi(k as i32);
                if len == 0.0 {
                    None // underflowed past double precision
                } else {
                    Some((len, m.powi(k as i32 - 1)))
                }
            }
            None => self.distinct.get(k - 1).copied(),
        }
    }

    /// Largest gap length `l_1`.
    pub fn first_length(&self) -> f64 {
        self.distinct_at(1).expect("strings always have a first gap").0
    }

    /// Total multiplicity of the first `k` distinct lengths
    /// (`sum_{i<=k} w_i`; zero for `k = 0`).
    fn weight_prefix(&self, k: usize) -> f64 {
        match self.cascade() {
            Some((_, m)) => {
                if k == 0 {
                    0.0
                } else if m == 1.0 {
                    k as f64
                } else {
                    (m.powi(k as i32) - 1.0) / (m - 1.0)
                }
            }
            None => self.distinct.iter().take(k).map(|&(_, w)| w).sum(),
        }
    }

    /// Closed-form tail `sum_{i >= k} w_i * l_i` of the total length.
    fn tail_length_sum(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self.cascade() {
            // sum_{i>=k} m^(i-1) r^i = m^(k-1) r^k / (1 - m r)
            Some((r, m)) => m.powi(k as i32 - 1) * r.powi(k as i32) / (1.0 - m * r),
            None => self.distinct.iter().skip(k - 1).map(|&(l, w)| l * w).sum(),
        }
    }

    /// Total gap length `sum_j l_j` (closed form for rule strings).
    pub fn total_length(&self) -> f64 {
        self.tail_length_sum(1)
    }

    /// Abscissa of convergence of the Dirichlet series `sum_j l_j^s`
    /// (`-inf` for explicit finite strings).
    pub fn abscissa(&self) -> f64 {
        match self.cascade() {
            Some((r, m)) => m.ln() / (1.0 / r).ln(),
            None => f64::NEG_INFINITY,
        }
    }

    /// Closed-form Dirichlet tail `sum_{i >= k} w_i * l_i^s`.
    fn tail_dirichlet(&self, k: usize, s: Complex64) -> Complex64 {
        debug_assert!(k >= 1);
        match self.cascade() {
            Some((r, m)) => {
                // sum_{i>=k} m^(i-1) (r^s)^i = m^(k-1) r^(k s) / (1 - m r^s)
                let rs = (s * r.ln()).exp();
                let head = m.powi(k as i32 - 1) * (s * (k as f64) * r.ln()).exp();
                head / (Complex64::new(1.0, 0.0) - m * rs)
            }
            None => self
                .distinct
                .iter()
                .skip(k - 1)
                .map(|&(l, w)| w * (s * l.ln()).exp())
                .sum(),
        }
    }

    /// Index bookkeeping against a threshold: returns
    /// `(last_geq, weight_geq, equal_weight)` where `last_geq` is the
    /// largest index whose length classifies as `>=` the threshold,
    /// `weight_geq` the total multiplicity up to it, and `equal_weight`
    /// the multiplicity classified as exactly equal.
    fn split_at_threshold(&self, threshold: f64) -> (usize, f64, f64) {
        let mut last_geq = 0usize;
        let mut weight_geq = 0.0;
        let mut equal_weight = 0.0;
        let mut k = 1usize;
        while let Some((len, w)) = self.distinct_at(k) {
            match classify(len, threshold) {
                Ordering::Greater => {
                    last_geq = k;
                    weight_geq += w;
                }
                Ordering::Equal => {
                    last_geq = k;
                    weight_geq += w;
                    equal_weight += w;
                }
                Ordering::Less => break,
            }
            k += 1;
        }
        (last_geq, weight_geq, equal_weight)
    }

    /// Counting function `N(x) = #{j : 1/l_j <= x}`, inclusive at jump
    /// points. Errors for `x <= 0`.
    pub fn counting_function(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::Domain(format!(
                "counting function requires x > 0, got {x}"
            )));
        }
        // 1/l_j <= x  <=>  l_j >= 1/x
        let (_, weight_geq, _) = self.split_at_threshold(1.0 / x);
        Ok(weight_geq)
    }

    /// Boundary-count basic function
    /// `beta0(t) = 1 + #{j : l_j > 2t}` (strict count, right-continuous).
    ///
    /// The equivalent counting-function form
    /// `1 + N(1/(2t)) - w(2t)` (inclusive count minus the multiplicity of
    /// gaps of length exactly `2t`) is evaluated alongside and asserted to
    /// agree.
    pub fn beta0(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::Domain(format!("beta0 requires t > 0, got {t}")));
        }
        let (_, weight_geq, equal_weight) = self.split_at_threshold(2.0 * t);
        let strict = weight_geq - equal_weight;
        let via_counting = 1.0 + weight_geq - equal_weight;
        let direct = 1.0 + strict;
        debug_assert_eq!(direct, via_counting);
        Ok(direct)
    }

    /// Breakpoints `l_k / 2` of `beta0` inside `[floor, ceil]`, ascending.
    pub fn beta0_breakpoints(&self, floor: f64, ceil: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 1usize;
        while let Some((len, _)) = self.distinct_at(k) {
            let b = len / 2.0;
            if b < floor {
                break;
            }
            if b <= ceil {
                out.push(b);
            }
            k += 1;
        }
        out.reverse();
        out
    }

    /// Tube volume `V(A_eps \ A)` of the string (endpoints included), by
    /// two structurally independent routes:
    ///
    /// * `steiner`: `2 * int_0^eps beta0(t) dt`, swept exactly over the
    ///   plateau decomposition of `beta0` with a closed-form remainder
    ///   below the sweep cutoff;
    /// * `direct`: `2 eps + 2 eps N(1/(2 eps)) + sum_{l_j < 2 eps} l_j`
    ///   with the partial gap sum taken from the rule's closed form.
    ///
    /// The two must agree to full floating-point accuracy; the pair is
    /// returned so callers and tests can check the identity themselves.
    pub fn tube_volume(&self, eps: f64) -> Result<(f64, f64)> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::Domain(format!(
                "tube volume requires finite eps > 0, got {eps}"
            )));
        }

        // Direct route.
        let (last_geq, weight_geq, _) = self.split_at_threshold(2.0 * eps);
        let tail = if self.distinct_at(last_geq + 1).is_some() {
            self.tail_length_sum(last_geq + 1)
        } else {
            0.0
        };
        let direct = 2.0 * eps + 2.0 * eps * weight_geq + tail;

        // Plateau sweep for 2 * int_0^eps beta0.
        // beta0 = 1 + weight_prefix(k) on [l_{k+1}/2, l_k/2).
        let mut integral = 0.0;
        let mut upper = eps;
        let mut level = 1.0 + weight_geq; // beta0 just below eps
        let mut k = last_geq + 1;
        let mut swept = 0usize;
        let mut closed = false;
        while let Some((len, w)) = self.distinct_at(k) {
            let b = (len / 2.0).min(upper);
            integral += level * (upper - b);
            upper = b;
            level += w;
            k += 1;
            swept += 1;
            if swept >= SERIES_HEAD {
                // Exact remainder: int_0^b beta0 = b (1 + N(1/(2b))) +
                // (1/2) sum_{l_j < 2b} l_j, with N evaluated just below b
                // = l_{k-1}/2 so gaps 1..k-1 count inclusively.
                let remainder =
                    upper * (1.0 + self.weight_prefix(k - 1)) + 0.5 * self.tail_length_sum(k);
                integral += remainder;
                closed = true;
                break;
            }
        }
        if !closed {
            // Explicit string exhausted: constant plateau down to zero.
            integral += level * upper;
        }
        let steiner = 2.0 * integral;
        Ok((steiner, direct))
    }

    /// One-sided derivatives of the tube volume at `eps`:
    /// left `2 + 2 N(1/(2 eps))` (inclusive), right `2 * beta0(eps)`
    /// (strict). They differ exactly at the breakpoints `l_j / 2`.
    pub fn tube_derivatives(&self, eps: f64) -> Result<(f64, f64)> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::Domain(format!(
                "tube derivatives require eps > 0, got {eps}"
            )));
        }
        let left = 2.0 + 2.0 * self.counting_function(1.0 / (2.0 * eps))?;
        let right = 2.0 * self.beta0(eps)?;
        Ok((left, right))
    }

    /// Geometric zeta function `sum_j l_j^s` by the three routes in
    /// [`ZetaValues`].
    ///
    /// Preconditions: `eps >= l_1 / 2` (the boundary-count route needs the
    /// whole breakpoint range inside `[0, eps]`), and `Re s` strictly above
    /// the abscissa of convergence (and above 0, where the two integral
    /// transforms stop converging even for finite strings).
    pub fn geometric_zeta(&self, s: Complex64, eps: f64) -> Result<ZetaValues> {
        let b1 = self.first_length() / 2.0;
        if eps.is_nan() || eps < b1 {
            return Err(Error::Domain(format!(
                "geometric zeta requires eps >= l_1/2 = {b1}, got {eps}"
            )));
        }
        let floor = self.abscissa().max(0.0);
        if s.re.is_nan() || s.re <= floor {
            return Err(Error::Divergence(format!(
                "geometric zeta evaluated at Re s = {} <= abscissa {}",
                s.re, floor
            )));
        }

        let pow = |base: f64, e: Complex64| -> Complex64 { (e * base.ln()).exp() };

        // Route 1: Dirichlet head + closed-form tail.
        let mut dirichlet = Complex64::new(0.0, 0.0);
        let mut k = 1usize;
        while k <= SERIES_HEAD {
            match self.distinct_at(k) {
                Some((l, w)) => dirichlet += w * pow(l, s),
                None => break,
            }
            k += 1;
        }
        if self.distinct_at(k).is_some() {
            dirichlet += self.tail_dirichlet(k, s);
        }

        // Route 2: Mellin transform of the counting function, swept over
        // the plateaus of N with an exact remainder.
        let mut mellin = Complex64::new(0.0, 0.0);
        let mut k = 1usize;
        loop {
            let (lk, _) = self.distinct_at(k).expect("inside the defined range");
            let wk = self.weight_prefix(k);
            match self.distinct_at(k + 1) {
                Some((lk1, _)) if k < SERIES_HEAD => {
                    mellin += wk * (pow(lk, s) - pow(lk1, s));
                }
                Some(_) => {
                    // remainder past the sweep: W_k l_k^s + tail Dirichlet
                    mellin += wk * pow(lk, s) + self.tail_dirichlet(k + 1, s);
                    break;
                }
                None => {
                    // final plateau of an explicit string
                    mellin += wk * pow(lk, s);
                    break;
                }
            }
            k += 1;
        }

        // Route 3: boundary-count transform
        // -(2 eps)^s + 2^s s int_0^eps t^(s-1) beta0(t) dt.
        let mut integral_s = pow(eps, s) - pow(b1, s); // beta0 = 1 on [b1, eps]
        let mut k = 1usize;
        loop {
            let (lk, _) = self.distinct_at(k).expect("inside the defined range");
            let bk = lk / 2.0;
            let level = 1.0 + self.weight_prefix(k);
            match self.distinct_at(k + 1) {
                Some((lk1, _)) if k < SERIES_HEAD => {
                    integral_s += level * (pow(bk, s) - pow(lk1 / 2.0, s));
                }
                Some(_) => {
                    integral_s +=
                        level * pow(bk, s) + pow(2.0, -s) * self.tail_dirichlet(k + 1, s);
                    break;
                }
                None => {
                    integral_s += level * pow(bk, s);
                    break;
                }
            }
            k += 1;
        }
        let functional = -pow(2.0 * eps, s) + pow(2.0, s) * integral_s;

        Ok(ZetaValues { dirichlet, mellin, functional })
    }
}

/// Truncated oscillatory tube expansion for the middle-third Cantor
/// string: with `D = ln 2 / ln 3` and `p = 2 pi / ln 3`,
///
/// `V_N(eps) = (2 eps)^(1-D) / (2 ln 3) *
///             sum_{|n| <= N} (2 eps)^(i n p) / ((D - i n p)(1 - D + i n p))`.
///
/// Valid for `0 < eps <= 1/6`; the partial sums converge to the exact tube
/// volume at `O(1/N)`-to-`O(1/N^2)` speed depending on the phase. At
/// `eps = 1/6` every phase factor aligns and the series evaluates the
/// endpoint value `4/3`.
pub fn cantor_tube_fourier(eps: f64, terms: u32) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 || eps > 1.0 / 6.0 {
        return Err(Error::Domain(format!(
            "cantor tube expansion is valid for 0 < eps <= 1/6, got {eps}"
        )));
    }
    let ln3 = 3.0f64.ln();
    let d = 2.0f64.ln() / ln3;
    let p = 2.0 * std::f64::consts::PI / ln3;
    let x = (2.0 * eps).ln();

    // n = 0 term plus conjugate pairs for n >= 1.
    let mut sum = 1.0 / (d * (1.0 - d));
    for n in 1..=terms {
        let np = n as f64 * p;
        let denom = Complex64::new(d, -np) * Complex64::new(1.0 - d, np);
        let phase = Complex64::new(0.0, np * x).exp();
        sum += 2.0 * (phase / denom).re;
    }
    Ok((2.0 * eps).powf(1.0 - d) / (2.0 * ln3) * sum)
}
