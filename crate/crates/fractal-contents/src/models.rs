//! Exact basic-function models: a catalog of compact sets whose
//! boundary-count functions `beta_i(t)` (and total-variation analogues)
//! are known in closed form or by exact combinatorial counting.
//!
//! The basic function `beta_i(t)` aggregates the i-th support mass of the
//! normal bundle restricted to pairs whose local reach exceeds `t`; it is
//! the exact t-resolved refinement of the i-th intrinsic volume. For every
//! model here the evaluation is exact:
//!
//! * smooth/polygonal sets (disc, circle, square boundary, two parallel
//!   segments) have short closed forms;
//! * the Sierpinski gasket's `beta_1` is a finite sum of clipped ramps,
//!   one per removed triangle generation;
//! * linear Cantor-type sets delegate to the exact gap counting in
//!   [`crate::strings`];
//! * the two generated prefractal families (fractal window, enclosed
//!   dust) are encoded as finite [`PrefractalEvents`] lists: each
//!   construction level contributes vertex counts and frame lengths that
//!   vanish once `t` reaches the level's reach threshold. Values below
//!   the generated resolution carry a truncation flag rather than
//!   silently extrapolating.
//!
//! Conventions: `beta_1` is measured in half-boundary-length units (a
//! convex curve of perimeter `P` has `beta_1 = P/2` per side), `beta_0`
//! in full-turn units for the exactly normalized models; the generated
//! window uses raw vertex counts (a fixed factor that cancels in every
//! exponent). All profiles are right-continuous: at a jump abscissa the
//! evaluation returns the right limit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::steiner::unit_ball_constants;
use crate::strings::{FractalString, StringRule};

/// A generated prefractal profile is trustworthy down to this multiple of
/// its finest event threshold; below that, evaluations are flagged.
pub const TRUNCATION_TRUST_FACTOR: f64 = 2.0;

/// Default relative tolerance for the parallel-volume quadrature in
/// [`tube_volume_from_profiles`].
pub const TUBE_QUADRATURE_TOL: f64 = 1e-10;

/// Catalog of supported compact sets.
///
/// `dim` is 1 for the linear string-generated sets and 2 for the planar
/// ones; `Scaled` wraps any model in a similarity of the given factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetModel {
    /// Closed disc of the given radius.
    Disc { radius: f64 },
    /// Circle (curve only) of the given radius.
    Circle { radius: f64 },
    /// Boundary of an axis-aligned square with the given side.
    SquareBoundary { side: f64 },
    /// Two parallel segments of the given length, separated by `gap`.
    ParallelSegments { length: f64, gap: f64 },
    /// Sierpinski gasket built on an equilateral triangle of side 1.
    SierpinskiGasket,
    /// Middle-third Cantor set in `[0, 1]`.
    CantorTernary,
    /// Smith-Volterra-type set: stage `k` removes `2^(k-1)` centered open
    /// intervals of length `a^-k` from `[0, 1]`; requires `a > 3`, so the
    /// remainder keeps positive measure.
    Svc { a: f64 },
    /// Inhomogeneous self-similar "window": the unit square boundary plus
    /// four copies scaled by `ratio` in its corners, iterated `level`
    /// times; `ratio` must lie in `(0, 1/2)`.
    FractalWindow { ratio: f64, level: u32 },
    /// Packing of square frames with side `j^-alpha` enclosing
    /// `(j^m - 1)^2` grid points each, `j = 1..=level`; requires
    /// `alpha` in `(1/2, 2/3]` and `m >= 1`.
    EnclosedDust { alpha: f64, m: u32, level: u32 },
    /// Arbitrary linear set described by a fractal string rule.
    StringSet { rule: StringRule },
    /// A model rescaled by a similarity with the given factor.
    Scaled { base: Box<SetModel>, factor: f64 },
}

/// How a profile's values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    /// Short closed-form expression (possibly a finite exact sum).
    ClosedForm,
    /// Exact combinatorial count over a string's gap lengths.
    CombinatorialCount,
    /// Exact for the generated levels, flagged below the trust floor.
    Truncated,
}

/// An evaluated basic-function value with its truncation status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eval {
    pub value: f64,
    /// True when `t` lies below a generated prefractal's trust floor so
    /// the value reflects the truncation level, not the limit set.
    pub truncated: bool,
}

impl Eval {
    fn exact(value: f64) -> Self {
        Eval { value, truncated: false }
    }
}

/// Finite event encoding of a generated prefractal's basic functions.
///
/// A vertex event `(t*, count)` contributes `count` to `beta_0(t)` while
/// `t < t*`; an edge event `(t*, length, shrink_rate)` contributes
/// `max(length - shrink_rate * t, 0)` to `beta_1(t)` while `t < t*`.
/// Persistent terms never expire. Event lists are sorted by threshold in
/// descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefractalEvents {
    pub vertex_events: Vec<(f64, f64)>,
    pub edge_events: Vec<(f64, f64, f64)>,
    pub persistent_beta0: f64,
    pub persistent_beta1: f64,
}

impl PrefractalEvents {
    /// `beta_0(t)`: persistent count plus all unexpired vertex counts.
    pub fn beta0(&self, t: f64) -> f64 {
        let live: f64 = self
            .vertex_events
            .iter()
            .take_while(|&&(th, _)| th > t)
            .map(|&(_, c)| c)
            .sum();
        self.persistent_beta0 + live
    }

    /// `beta_1(t)`: persistent length plus all unexpired clipped ramps.
    pub fn beta1(&self, t: f64) -> f64 {
        let live: f64 = self
            .edge_events
            .iter()
            .take_while(|&&(th, _, _)| th > t)
            .map(|&(_, len, sh)| (len - sh * t).max(0.0))
            .sum();
        self.persistent_beta1 + live
    }

    /// Smallest event threshold in either list.
    pub fn finest_threshold(&self) -> f64 {
        let v = self.vertex_events.last().map(|&(t, _)| t).unwrap_or(f64::INFINITY);
        let e = self.edge_events.last().map(|&(t, _, _)| t).unwrap_or(f64::INFINITY);
        v.min(e)
    }

    /// Scale below which evaluations are flagged as truncated.
    pub fn trust_floor(&self) -> f64 {
        TRUNCATION_TRUST_FACTOR * self.finest_threshold()
    }

    fn check_sorted(&self) {
        debug_assert!(self.vertex_events.windows(2).all(|w| w[0].0 >= w[1].0));
        debug_assert!(self.edge_events.windows(2).all(|w| w[0].0 >= w[1].0));
    }
}

/// Riemann zeta for real `s > 1` by Euler-Maclaurin summation; absolute
/// error below 1e-14 throughout `(1, 4]`, which covers every use here.
fn riemann_zeta(s: f64) -> f64 {
    debug_assert!(s > 1.0);
    let n = 10_000.0f64;
    let mut head = 0.0;
    let mut j = 1.0;
    while j < n {
        head += j.powf(-s);
        j += 1.0;
    }
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

/// Build the event list of a generated prefractal (fractal window or
/// enclosed dust). Other kinds are a domain error; scaled wrappers must
/// be peeled first since events live in the base scale.
pub fn generate_prefractal(model: &SetModel) -> Result<PrefractalEvents> {
    model.validate()?;
    let events = match *model {
        SetModel::FractalWindow { ratio, level } => window_events(ratio, level)?,
        SetModel::EnclosedDust { alpha, m, level } => dust_events(alpha, m, level)?,
        ref other => {
            return Err(Error::Domain(format!(
                "prefractal events exist only for the generated families, \
                 not {other:?}"
            )))
        }
    };
    events.check_sorted();
    Ok(events)
}

fn window_events(r: f64, level: u32) -> Result<PrefractalEvents> {
    // p is the gap between the four scaled frames and the initial frame.
    let p = (1.0 - 2.0 * r) / 3.0;
    let mut vertex_events = Vec::with_capacity(level as usize);
    // The initial frame's inward sides die against the level-1 frames at
    // reach p/2; its outer half-length 2 and 4 corners persist.
    let mut edge_events = vec![(p / 2.0, 2.0, 4.0)];
    for j in 1..=level as i32 {
        // Sibling frames of level j are p * r^(j-1) apart.
        let threshold = p * r.powi(j - 1) / 2.0;
        let count = 4.0f64.powi(j + 1);
        let length = 4.0 * (4.0 * r).powi(j);
        let shrink = 4.0f64.powi(j + 1);
        if threshold == 0.0 || !count.is_finite() || !length.is_finite() {
            return Err(Error::Generation(format!(
                "window level {j} underflows double precision \
                 (threshold {threshold:e})"
            )));
        }
        vertex_events.push((threshold, count));
        edge_events.push((threshold, length, shrink));
    }
    Ok(PrefractalEvents {
        vertex_events,
        edge_events,
        persistent_beta0: 4.0,
        persistent_beta1: 2.0,
    })
}

fn dust_events(alpha: f64, m: u32, level: u32) -> Result<PrefractalEvents> {
    let mut vertex_events = Vec::new();
    let mut edge_events = Vec::with_capacity(level as usize);
    for j in 1..=level as u64 {
        let jf = j as f64;
        // Grid spacing inside frame j; also the frame-to-point reach.
        let spacing = jf.powf(-(alpha + m as f64));
        let threshold = spacing / 2.0;
        if threshold == 0.0 {
            return Err(Error::Generation(format!(
                "dust frame {j} underflows double precision"
            )));
        }
        // Half the frame perimeter, shrinking at the four corners.
        edge_events.push((threshold, 2.0 * jf.powf(-alpha), 4.0));
        let points = (jf.powi(m as i32) - 1.0).powi(2);
        if points > 0.0 {
            if !points.is_finite() {
                return Err(Error::Generation(format!(
                    "dust frame {j} point count overflows double precision"
                )));
            }
            vertex_events.push((threshold, points));
        }
    }
    Ok(PrefractalEvents {
        vertex_events,
        edge_events,
        persistent_beta0: 1.0,
        // Half the perimeter of the enclosing square of area zeta(2 alpha).
        persistent_beta1: 2.0 * riemann_zeta(2.0 * alpha).sqrt(),
    })
}

impl SetModel {
    /// Parse a model from its JSON description, validating parameters.
    pub fn from_json(text: &str) -> Result<Self> {
        let model: SetModel =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    /// Serialize the model to its JSON description.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Ambient dimension: 1 for string-generated linear sets, 2 otherwise.
    pub fn dim(&self) -> usize {
        match self {
            SetModel::CantorTernary | SetModel::Svc { .. } | SetModel::StringSet { .. } => 1,
            SetModel::Scaled { base, .. } => base.dim(),
            _ => 2,
        }
    }

    /// Check all parameter-range invariants.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
            }
        }
        match self {
            SetModel::Disc { radius } | SetModel::Circle { radius } => {
                positive("radius", *radius)
            }
            SetModel::SquareBoundary { side } => positive("side", *side),
            SetModel::ParallelSegments { length, gap } => {
                positive("length", *length)?;
                positive("gap", *gap)
            }
            SetModel::SierpinskiGasket | SetModel::CantorTernary => Ok(()),
            SetModel::Svc { a } => {
                FractalString::svc(*a).map(|_| ())
            }
            SetModel::FractalWindow { ratio, level } => {
                if !(*ratio > 0.0 && *ratio < 0.5) {
                    return Err(Error::Domain(format!(
                        "window ratio must lie in (0, 1/2), got {ratio}"
                    )));
                }
                if *level < 1 {
                    return Err(Error::Domain("window level must be at least 1".into()));
                }
                Ok(())
            }
            SetModel::EnclosedDust { alpha, m, level } => {
                if !(*alpha > 0.5 && *alpha <= 2.0 / 3.0) {
                    return Err(Error::Domain(format!(
                        "dust exponent alpha must lie in (1/2, 2/3], got {alpha}"
                    )));
                }
                if *m < 1 {
                    return Err(Error::Domain("dust power m must be at least 1".into()));
                }
                if *level < 1 {
                    return Err(Error::Domain("dust level must be at least 1".into()));
                }
                Ok(())
            }
            SetModel::StringSet { rule } => {
                FractalString::from_rule(rule.clone()).map(|_| ())
            }
            SetModel::Scaled { base, factor } => {
                positive("scale factor", *factor)?;
                base.validate()
            }
        }
    }

    /// Basic-function profile for index `i`; `i` must be below `dim`.
    pub fn profile(&self, i: usize) -> Result<BasicFunctionProfile> {
        BasicFunctionProfile::new(self, i)
    }

    /// One-off evaluation of `beta_i(t)`; builds the profile each call,
    /// so loops should hold a [`BasicFunctionProfile`] instead.
    pub fn beta(&self, i: usize, t: f64) -> Result<Eval> {
        self.profile(i)?.evaluate(t)
    }

    /// One-off evaluation of the total-variation analogue.
    pub fn beta_var(&self, i: usize, t: f64) -> Result<Eval> {
        self.profile(i)?.evaluate_var(t)
    }
}

/// Rescale a model by a similarity factor `r`. Models with a native size
/// parameter are rescaled in place; anchored constructions (gasket,
/// Cantor-type sets, generated prefractals) are wrapped in
/// [`SetModel::Scaled`]. The result satisfies
/// `beta_i(rA, t) = r^i * beta_i(A, t/r)` exactly.
pub fn scale_model(model: &SetModel, r: f64) -> Result<SetModel> {
    model.validate()?;
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Domain(format!(
            "scale factor must be positive and finite, got {r}"
        )));
    }
    if r == 1.0 {
        return Ok(model.clone());
    }
    Ok(match model {
        SetModel::Disc { radius } => SetModel::Disc { radius: r * radius },
        SetModel::Circle { radius } => SetModel::Circle { radius: r * radius },
        SetModel::SquareBoundary { side } => SetModel::SquareBoundary { side: r * side },
        SetModel::ParallelSegments { length, gap } => {
            SetModel::ParallelSegments { length: r * length, gap: r * gap }
        }
        SetModel::Scaled { base, factor } => {
            SetModel::Scaled { base: base.clone(), factor: r * factor }
        }
        other => SetModel::Scaled { base: Box::new(other.clone()), factor: r },
    })
}

/// Tube volume `V(A_eps \ A)` by elementary geometry, where available:
/// the smooth/polygonal planar models and all linear string sets. Models
/// whose exact tube volume is not part of the catalog return `Ok(None)`.
pub fn exact_tube_volume(model: &SetModel, eps: f64) -> Result<Option<f64>> {
    model.validate()?;
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Domain(format!(
            "tube volume requires finite eps > 0, got {eps}"
        )));
    }
    let value = match model {
        SetModel::Disc { radius } => Some(2.0 * PI * radius * eps + PI * eps * eps),
        SetModel::Circle { radius } => Some(if eps < *radius {
            4.0 * PI * radius * eps
        } else {
            PI * (radius + eps) * (radius + eps)
        }),
        SetModel::SquareBoundary { side } => Some(if eps < side / 2.0 {
            8.0 * side * eps - 4.0 * eps * eps + PI * eps * eps
        } else {
            4.0 * side * eps + side * side + PI * eps * eps
        }),
        SetModel::CantorTernary => Some(FractalString::cantor().tube_volume(eps)?.1),
        SetModel::Svc { a } => Some(FractalString::svc(*a)?.tube_volume(eps)?.1),
        SetModel::StringSet { rule } => {
            Some(FractalString::from_rule(rule.clone())?.tube_volume(eps)?.1)
        }
        SetModel::Scaled { base, factor } => {
            let d = base.dim() as i32;
            exact_tube_volume(base, eps / factor)?.map(|v| v * factor.powi(d))
        }
        _ => None,
    };
    Ok(value)
}

/// The gasket's `beta_1`: half the initial perimeter plus, for each
/// removed-triangle generation `k` (side `2^-k`, `3^(k-1)` copies), a
/// clipped ramp that vanishes exactly at the generation's inradius.
fn gasket_beta1(t: f64) -> f64 {
    let sqrt3 = 3.0f64.sqrt();
    let mut sum = 1.5;
    let mut k: i32 = 1;
    loop {
        // Per-triangle surviving half-length 3 (2^(-k-1) - sqrt(3) t).
        let ramp = 2.0f64.powi(-k - 1) - sqrt3 * t;
        if ramp <= 0.0 {
            break;
        }
        sum += 3.0f64.powi(k - 1) * 3.0 * ramp;
        k += 1;
    }
    sum
}

/// Exact `beta_0` of two parallel segments at separation `gap`: the four
/// endpoint fans total mass 2; once `t` exceeds `gap/2`, the directions
/// facing the opposite segment (which collide at the midline) drop out
/// continuously, leaving mass 1 in the limit.
fn parallel_segments_beta0(gap: f64, t: f64) -> f64 {
    if t < gap / 2.0 {
        2.0
    } else {
        2.0 - (2.0 / PI) * (gap / (2.0 * t)).clamp(-1.0, 1.0).acos()
    }
}

/// Basic-function evaluator for one `(model, index)` pair, with any
/// scaling factor peeled off and per-model backing data (event lists,
/// fractal strings) built once.
#[derive(Debug, Clone)]
pub struct BasicFunctionProfile {
    base: SetModel,
    factor: f64,
    index: usize,
    dim: usize,
    events: Option<PrefractalEvents>,
    string: Option<FractalString>,
}

impl BasicFunctionProfile {
    pub fn new(model: &SetModel, index: usize) -> Result<Self> {
        model.validate()?;
        let dim = model.dim();
        if index >= dim {
            return Err(Error::Domain(format!(
                "basic-function index {index} out of range for a \
                 {dim}-dimensional model"
            )));
        }
        // Peel scaling wrappers into a single factor.
        let mut base = model.clone();
        let mut factor = 1.0;
        while let SetModel::Scaled { base: inner, factor: f } = base {
            factor *= f;
            base = *inner;
        }
        let events = match base {
            SetModel::FractalWindow { .. } | SetModel::EnclosedDust { .. } => {
                Some(generate_prefractal(&base)?)
            }
            _ => None,
        };
        let string = match &base {
            SetModel::CantorTernary => Some(FractalString::cantor()),
            SetModel::Svc { a } => Some(FractalString::svc(*a)?),
            SetModel::StringSet { rule } => Some(FractalString::from_rule(rule.clone())?),
            _ => None,
        };
        Ok(BasicFunctionProfile { base, factor, index, dim, events, string })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exactness(&self) -> Exactness {
        match self.base {
            SetModel::FractalWindow { .. } | SetModel::EnclosedDust { .. } => {
                Exactness::Truncated
            }
            SetModel::CantorTernary | SetModel::Svc { .. } | SetModel::StringSet { .. } => {
                Exactness::CombinatorialCount
            }
            _ => Exactness::ClosedForm,
        }
    }

    /// Scale below which values carry the truncation flag (0 for fully
    /// exact models).
    pub fn trust_floor(&self) -> f64 {
        match &self.events {
            Some(ev) => self.factor * ev.trust_floor(),
            None => 0.0,
        }
    }

    /// Evaluate `beta_index(t)`.
    pub fn evaluate(&self, t: f64) -> Result<Eval> {
        self.eval_impl(t, false)
    }

    /// Evaluate the total-variation analogue `beta_index^var(t)`.
    pub fn evaluate_var(&self, t: f64) -> Result<Eval> {
        self.eval_impl(t, true)
    }

    fn eval_impl(&self, t: f64, var: bool) -> Result<Eval> {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::Domain(format!(
                "basic functions are defined for finite t > 0, got {t}"
            )));
        }
        let s = t / self.factor;
        let raw = self.eval_base(s, var)?;
        Ok(Eval {
            value: self.factor.powi(self.index as i32) * raw.value,
            truncated: raw.truncated,
        })
    }

    fn eval_base(&self, t: f64, var: bool) -> Result<Eval> {
        let i = self.index;
        let v = match &self.base {
            SetModel::Disc { radius } => match i {
                0 => Eval::exact(1.0),
                _ => Eval::exact(radius * PI),
            },
            SetModel::Circle { radius } => match i {
                0 => {
                    // Signed: the inner normals (mass 1, reach R) carry a
                    // negative index; the variation counts them positively.
                    if var {
                        Eval::exact(if t < *radius { 2.0 } else { 1.0 })
                    } else {
                        Eval::exact(if t < *radius { 0.0 } else { 1.0 })
                    }
                }
                _ => Eval::exact(if t < *radius { 2.0 * radius * PI } else { radius * PI }),
            },
            SetModel::SquareBoundary { side } => match i {
                0 => Eval::exact(1.0),
                _ => Eval::exact(if t < side / 2.0 { 4.0 * side - 4.0 * t } else { 2.0 * side }),
            },
            SetModel::ParallelSegments { length, gap } => match i {
                0 => Eval::exact(parallel_segments_beta0(*gap, t)),
                _ => Eval::exact(if t < gap / 2.0 { 4.0 * length } else { 2.0 * length }),
            },
            SetModel::SierpinskiGasket => match i {
                0 => Eval::exact(1.0),
                _ => Eval::exact(gasket_beta1(t)),
            },
            SetModel::CantorTernary | SetModel::Svc { .. } | SetModel::StringSet { .. } => {
                let s = self.string.as_ref().expect("string models carry their string");
                Eval::exact(s.beta0(t)?)
            }
            SetModel::FractalWindow { .. } | SetModel::EnclosedDust { .. } => {
                let ev = self.events.as_ref().expect("generated models carry events");
                let value = if i == 0 { ev.beta0(t) } else { ev.beta1(t) };
                Eval { value, truncated: t < ev.trust_floor() }
            }
            SetModel::Scaled { .. } => unreachable!("scaling factors are peeled in new()"),
        };
        Ok(v)
    }

    /// Jump/kink abscissae within `[floor, ceil]`, ascending. For models
    /// with infinitely many breakpoints accumulating at 0, only those at
    /// or above `floor` are materialized.
    pub fn breakpoints(&self, floor: f64, ceil: f64) -> Vec<f64> {
        let lo = (floor / self.factor).max(0.0);
        let hi = ceil / self.factor;
        let mut pts = self.base_breakpoints(lo, hi);
        for p in &mut pts {
            *p *= self.factor;
        }
        pts
    }

    fn base_breakpoints(&self, floor: f64, ceil: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = match &self.base {
            SetModel::Disc { .. } => Vec::new(),
            SetModel::Circle { radius } => vec![*radius],
            SetModel::SquareBoundary { side } => vec![side / 2.0],
            SetModel::ParallelSegments { gap, .. } => vec![gap / 2.0],
            SetModel::SierpinskiGasket => {
                // Kinks at the removed triangles' inradii g * 2^(1-k).
                let g = 1.0 / (4.0 * 3.0f64.sqrt());
                let mut v = Vec::new();
                let mut b = g;
                while b >= floor && b > 0.0 {
                    if b <= ceil {
                        v.push(b);
                    }
                    b /= 2.0;
                }
                v
            }
            SetModel::CantorTernary | SetModel::Svc { .. } | SetModel::StringSet { .. } => {
                self.string
                    .as_ref()
                    .expect("string models carry their string")
                    .beta0_breakpoints(floor, ceil)
            }
            SetModel::FractalWindow { .. } | SetModel::EnclosedDust { .. } => {
                let ev = self.events.as_ref().expect("generated models carry events");
                let mut v: Vec<f64> = Vec::new();
                for &(th, _) in &ev.vertex_events {
                    v.push(th);
                }
                for &(th, len, sh) in &ev.edge_events {
                    v.push(th);
                    let clip = len / sh;
                    if clip < th {
                        v.push(clip);
                    }
                }
                v
            }
            SetModel::Scaled { .. } => unreachable!("scaling factors are peeled in new()"),
        };
        pts.retain(|&b| b >= floor && b <= ceil && b > 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Adaptive Simpson quadrature with interval-doubling error control.
fn adaptive_simpson(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    simpson_step(f, a, b, fa, fm, fb, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let h = b - a;
    let whole = h / 6.0 * (fa + 4.0 * fm + fb);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        Ok(left + right + err / 15.0)
    } else {
        let half = 0.5 * tol;
        Ok(simpson_step(f, a, m, fa, flm, fm, half, depth - 1)?
            + simpson_step(f, m, b, fm, frm, fb, half, depth - 1)?)
    }
}

/// Integrate `t^pow * beta(t)` over `[a, b]`, splitting at the profile's
/// breakpoints so each quadrature piece is smooth. Returns the integral
/// and whether any evaluation was truncated.
pub(crate) fn integrate_profile(
    profile: &BasicFunctionProfile,
    var: bool,
    pow: f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Eval> {
    debug_assert!(a >= 0.0 && b >= a);
    if b == a {
        return Ok(Eval::exact(0.0));
    }
    let mut cuts = profile.breakpoints(a.max(b * 1e-15), b);
    cuts.retain(|&c| c > a && c < b);
    cuts.push(b);
    let mut truncated = false;
    let mut total = 0.0;
    let mut lo = a;
    let scale = tol.max(1e-15);
    for hi in cuts {
        let mut eval = |t: f64| -> Result<f64> {
            let e = if var { profile.evaluate_var(t)? } else { profile.evaluate(t)? };
            truncated |= e.truncated;
            Ok(if pow == 0.0 { e.value } else { t.powf(pow) * e.value })
        };
        // Open the left endpoint slightly: integrands may blow up at 0.
        let lo_eff = if lo == 0.0 { hi * 1e-300 } else { lo };
        total += adaptive_simpson(&mut eval, lo_eff, hi, scale * (hi - lo).max(1e-6), 40)?;
        lo = hi;
    }
    Ok(Eval { value: total, truncated })
}

/// Parallel volume `V(A_eps \ A)` assembled from the model's basic
/// functions: `sum_i omega_(d-i) int_0^eps t^(d-i-1) beta_i(t) dt`.
///
/// This is the generic route; it must agree with
/// [`exact_tube_volume`] wherever the latter is available. Near 0 the
/// integral is split dyadically so the (integrable) blow-up of fractal
/// profiles is summed to the requested tolerance.
pub fn tube_volume_from_profiles(model: &SetModel, eps: f64, tol: f64) -> Result<Eval> {
    model.validate()?;
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Domain(format!(
            "tube volume requires finite eps > 0, got {eps}"
        )));
    }
    let d = model.dim();
    let (_, omega) = unit_ball_constants(d)?;
    let mut total = 0.0;
    let mut truncated = false;
    for i in 0..d {
        let profile = model.profile(i)?;
        let pow = (d - i - 1) as f64;
        // Dyadic shells downward from eps until the tail is negligible.
        let mut part = 0.0;
        let mut hi = eps;
        for _ in 0..1100 {
            let lo = hi / 2.0;
            let shell = integrate_profile(&profile, false, pow, lo, hi, tol)?;
            truncated |= shell.truncated;
            part += shell.value;
            hi = lo;
            if shell.value.abs() <= tol * part.abs().max(1e-12) || hi < 1e-300 {
                break;
            }
        }
        total += omega[d - i] * part;
    }
    Ok(Eval { value: total, truncated })
}
