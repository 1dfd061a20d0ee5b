//! Toric adelic divisors: places, metric/roof data over a shared fan or
//! polytope, minima, arithmetic volumes, intersection numbers and the
//! positivity dictionary.
//!
//! Two scalar regimes coexist. Fully rational data runs on the LP/polytope
//! machinery. Shifted-canonical data (per-place shift vectors u_v and
//! constants c_v, possibly with log-prime coordinates) has affine roofs
//! ⟨u_v,x⟩ + c_v, so maxima and minima sit at polytope vertices and remain
//! exactly decidable in log-linear arithmetic.

use num_traits::{Signed, Zero};

use crate::concave::{
    linear_combination, metric_to_roof, roof_to_metric, AffineFamily, AffineForm, PAConcave,
};
use crate::error::{Error, Result};
use crate::exactgeom::polytope::{self, mixed_volume, Cone, Polytope};
use crate::exactgeom::{dot, vneg, vsub, zeros, Vector};
use crate::scalar::{LogLinear, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlaceKind {
    Archimedean,
    NonArchimedean(u64),
    Abstract,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Place {
    pub name: String,
    pub kind: PlaceKind,
    pub weight: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Number field ℚ: one archimedean place, prime places, all weights 1.
    Q,
    /// Arbitrary positive weights, no genuine absolute values.
    Abstract,
}

/// Piecewise-linear support data on a complete fan: one cone per entry with
/// its linear form m_σ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualSupport {
    pub cones: Vec<Cone>,
    pub linear_forms: Vec<Vector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupportData {
    Fan(VirtualSupport),
    /// Direct polytope input (nef divisors only).
    Nef(Polytope),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaceDatum {
    /// ψ_v = Ψ_D.
    Canonical,
    /// ψ_v as a global min of affine forms; gradients must span Δ_D.
    Metric(AffineFamily),
    /// ϑ_v directly, on Δ_D.
    Roof(PAConcave),
    /// ψ_v(w) = Ψ_D(w − u) − c, i.e. roof ⟨u,x⟩ + c; entries may carry logs.
    Shift { u: Vec<LogLinear>, c: LogLinear },
}

/// Per-place or global roof function on Δ_D.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Roof {
    Pa(PAConcave),
    /// Affine roof ⟨u,x⟩ + c with log-linear coefficients.
    Affine { u: Vec<LogLinear>, c: LogLinear },
}

impl Roof {
    pub fn eval_at_rational(&self, x: &[Rational]) -> Result<LogLinear> {
        match self {
            Roof::Pa(f) => Ok(LogLinear::from_rational(f.evaluate(x)?)),
            Roof::Affine { u, c } => Ok(ll_affine_eval(u, c, x)),
        }
    }
}

fn ll_affine_eval(u: &[LogLinear], c: &LogLinear, x: &[Rational]) -> LogLinear {
    let mut acc = c.clone();
    for (ui, xi) in u.iter().zip(x) {
        acc += ui.scale(xi);
    }
    acc
}

/// Metric-side function with rational gradients and log-linear constants,
/// evaluable at log-linear points: u ↦ min_i(⟨g_i,u⟩ + c_i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricFn {
    pub pieces: Vec<(Vector, LogLinear)>,
    pub dim: usize,
}

impl MetricFn {
    pub fn eval(&self, u: &[LogLinear]) -> LogLinear {
        assert_eq!(u.len(), self.dim);
        let mut best: Option<LogLinear> = None;
        for (g, c) in &self.pieces {
            let mut val = c.clone();
            for (gi, ui) in g.iter().zip(u) {
                val += ui.scale(gi);
            }
            best = Some(match best {
                None => val,
                Some(b) => LogLinear::min_exact(b, val),
            });
        }
        best.expect("metric has a piece")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositivityFlags {
    pub pseudo_effective: bool,
    pub big: bool,
    pub semipositive: bool,
    pub nef: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZhangReport {
    pub mu_ess: LogLinear,
    /// mean of the global roof over Δ_D (= vol̂_χ/((d+1)·vol))
    pub mean_delta: LogLinear,
    /// mean over Γ_D when nonempty
    pub mean_gamma: Option<LogLinear>,
    pub equality: bool,
}

#[derive(Clone, Debug)]
pub struct Volumes {
    pub vol: Rational,
    pub vol_hat: LogLinear,
    pub vol_chihat: LogLinear,
    pub gamma: Option<Polytope>,
}

#[derive(Clone, Debug)]
pub struct ToricAdelicDivisor {
    pub dim: usize,
    pub mode: Mode,
    pub support: SupportData,
    pub places: Vec<(Place, PlaceDatum)>,
    delta: Option<Polytope>,
    fan_concave: bool,
}

/// Polytope of a fan-described divisor: ∩_σ {x : ⟨g, x − m_σ⟩ ≥ 0 ∀g ∈ σ}.
/// `Ok(None)` when empty; incomplete fans leave the region unbounded.
pub fn polytope_of(support: &VirtualSupport, dim: usize) -> Result<Option<Polytope>> {
    if support.cones.len() != support.linear_forms.len() {
        return Err(Error::Semantic(
            "fan needs one linear form per cone".into(),
        ));
    }
    let mut hs = Vec::new();
    for (cone, m) in support.cones.iter().zip(&support.linear_forms) {
        if m.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.len(),
            });
        }
        for g in &cone.generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.len(),
                });
            }
            hs.push((vneg(g), -dot(g, m)));
        }
    }
    match polytope::from_halfspaces(dim, &hs) {
        Ok(p) => Ok(p),
        Err(Error::Unbounded) => Err(Error::FanNotComplete),
        Err(e) => Err(e),
    }
}

/// Ψ_D is concave iff for every pair of cones the foreign form dominates the
/// own form on the cone's generators.
fn fan_is_concave(support: &VirtualSupport) -> bool {
    for (cone, m) in support.cones.iter().zip(&support.linear_forms) {
        for m_other in &support.linear_forms {
            for g in &cone.generators {
                if dot(&vsub(m_other, m), g).is_negative() {
                    return false;
                }
            }
        }
    }
    true
}

fn ll_is_rational(u: &[LogLinear]) -> bool {
    u.iter().all(|x| x.is_rational())
}

impl ToricAdelicDivisor {
    pub fn new(
        dim: usize,
        mode: Mode,
        support: SupportData,
        places: Vec<(Place, PlaceDatum)>,
    ) -> Result<Self> {
        let (delta, fan_concave) = match &support {
            SupportData::Fan(f) => (polytope_of(f, dim)?, fan_is_concave(f)),
            SupportData::Nef(p) => {
                if p.ambient != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: p.ambient,
                    });
                }
                (Some(p.clone()), true)
            }
        };
        // place-set sanity
        if mode == Mode::Q {
            let arch: Vec<_> = places
                .iter()
                .filter(|(p, _)| p.kind == PlaceKind::Archimedean)
                .collect();
            if arch.len() != 1 {
                return Err(Error::Semantic(
                    "rational-field mode needs exactly one archimedean place".into(),
                ));
            }
            let mut primes = std::collections::BTreeSet::new();
            for (p, _) in &places {
                match &p.kind {
                    PlaceKind::Archimedean => {}
                    PlaceKind::NonArchimedean(q) => {
                        if !primes.insert(*q) {
                            return Err(Error::Semantic(format!(
                                "duplicate prime place {q}"
                            )));
                        }
                    }
                    PlaceKind::Abstract => {
                        return Err(Error::Semantic(
                            "abstract places are not allowed in rational-field mode".into(),
                        ));
                    }
                }
                if p.weight != Rational::from_integer(1.into()) {
                    return Err(Error::Semantic(
                        "rational-field mode fixes all place weights to 1".into(),
                    ));
                }
            }
        } else {
            for (p, _) in &places {
                if !p.weight.is_positive() {
                    return Err(Error::Semantic(format!(
                        "place {:?} has non-positive weight",
                        p.name
                    )));
                }
            }
        }
        {
            let mut names = std::collections::BTreeSet::new();
            for (p, _) in &places {
                if !names.insert(p.name.clone()) {
                    return Err(Error::Semantic(format!("duplicate place {:?}", p.name)));
                }
            }
        }
        // datum sanity against Δ_D
        for (p, datum) in &places {
            match datum {
                PlaceDatum::Canonical => {}
                _ if !fan_concave => {
                    return Err(Error::NotConcave(p.name.clone()));
                }
                _ if delta.is_none() => {
                    return Err(Error::Semantic(format!(
                        "place {:?} carries data but the divisor polytope is empty",
                        p.name
                    )));
                }
                PlaceDatum::Metric(fam) => {
                    let roof = metric_to_roof(fam)?;
                    if Some(&roof.domain) != delta.as_ref() {
                        return Err(Error::Semantic(format!(
                            "metric at place {:?} has recession polytope different from the divisor polytope",
                            p.name
                        )));
                    }
                }
                PlaceDatum::Roof(f) => {
                    if Some(&f.domain) != delta.as_ref() {
                        return Err(Error::Semantic(format!(
                            "roof at place {:?} is not defined on the divisor polytope",
                            p.name
                        )));
                    }
                }
                PlaceDatum::Shift { u, .. } => {
                    if u.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: u.len(),
                        });
                    }
                }
            }
        }
        let div = ToricAdelicDivisor {
            dim,
            mode,
            support,
            places,
            delta,
            fan_concave,
        };
        if div.has_log_data() {
            // log-coordinate shifts mix with PA data only through the affine
            // roof form, so every place must be canonical or shift type
            for (p, datum) in &div.places {
                match datum {
                    PlaceDatum::Canonical | PlaceDatum::Shift { .. } => {}
                    _ => {
                        return Err(Error::Semantic(format!(
                            "place {:?}: piecewise data cannot be mixed with log-coordinate shifts",
                            p.name
                        )));
                    }
                }
            }
        }
        Ok(div)
    }

    /// Convenience: nef divisor given by its polytope, places attached.
    pub fn from_polytope(
        mode: Mode,
        delta: Polytope,
        places: Vec<(Place, PlaceDatum)>,
    ) -> Result<Self> {
        let dim = delta.ambient;
        Self::new(dim, mode, SupportData::Nef(delta), places)
    }

    pub fn delta(&self) -> Option<&Polytope> {
        self.delta.as_ref()
    }

    pub fn delta_required(&self) -> Result<&Polytope> {
        self.delta
            .as_ref()
            .ok_or_else(|| Error::Semantic("divisor polytope is empty".into()))
    }

    pub fn has_log_data(&self) -> bool {
        self.places.iter().any(|(_, d)| match d {
            PlaceDatum::Shift { u, c } => !ll_is_rational(u) || !c.is_rational(),
            _ => false,
        })
    }

    pub fn place(&self, name: &str) -> Option<&(Place, PlaceDatum)> {
        self.places.iter().find(|(p, _)| p.name == name)
    }

    /// ϑ_v for one place.
    pub fn roof_of(&self, name: &str) -> Result<Roof> {
        let delta = self.delta_required()?.clone();
        let (_, datum) = self
            .place(name)
            .ok_or_else(|| Error::Semantic(format!("unknown place {name:?}")))?;
        self.roof_of_datum(datum, delta)
    }

    fn roof_of_datum(&self, datum: &PlaceDatum, delta: Polytope) -> Result<Roof> {
        match datum {
            PlaceDatum::Canonical => Ok(Roof::Pa(PAConcave::constant(delta, Rational::zero()))),
            PlaceDatum::Metric(fam) => Ok(Roof::Pa(metric_to_roof(fam)?)),
            PlaceDatum::Roof(f) => Ok(Roof::Pa(f.clone())),
            PlaceDatum::Shift { u, c } => {
                if ll_is_rational(u) && c.is_rational() {
                    let grad: Vector = u.iter().map(|x| x.rational.clone()).collect();
                    Ok(Roof::Pa(PAConcave::new(
                        delta,
                        vec![AffineForm::new(grad, c.rational.clone())],
                    )?))
                } else {
                    Ok(Roof::Affine {
                        u: u.clone(),
                        c: c.clone(),
                    })
                }
            }
        }
    }

    /// All per-place roofs plus the weighted global roof Σ n_v ϑ_v.
    pub fn roof_functions(&self) -> Result<(Vec<(String, Roof)>, Roof)> {
        let delta = self.delta_required()?.clone();
        let mut per_place = Vec::new();
        for (p, datum) in &self.places {
            per_place.push((p.name.clone(), self.roof_of_datum(datum, delta.clone())?));
        }
        let global = if self.has_log_data() {
            let mut u = vec![LogLinear::zero(); self.dim];
            let mut c = LogLinear::zero();
            for ((p, _), (_, roof)) in self.places.iter().zip(&per_place) {
                match roof {
                    Roof::Affine { u: uv, c: cv } => {
                        for (acc, x) in u.iter_mut().zip(uv) {
                            *acc += x.scale(&p.weight);
                        }
                        c += cv.scale(&p.weight);
                    }
                    Roof::Pa(f) => {
                        // log mode admits only canonical/shift places, whose
                        // PA roofs are single affine pieces
                        let piece = &f.pieces[0];
                        for (acc, g) in u.iter_mut().zip(&piece.gradient) {
                            *acc += LogLinear::from_rational(g * &p.weight);
                        }
                        c += LogLinear::from_rational(&piece.constant * &p.weight);
                    }
                }
            }
            Roof::Affine { u, c }
        } else {
            let pas: Vec<(Rational, PAConcave)> = self
                .places
                .iter()
                .zip(&per_place)
                .map(|((p, _), (_, roof))| match roof {
                    Roof::Pa(f) => (p.weight.clone(), f.clone()),
                    Roof::Affine { .. } => unreachable!("rational divisor"),
                })
                .collect();
            if pas.is_empty() {
                Roof::Pa(PAConcave::constant(delta, Rational::zero()))
            } else {
                let refs: Vec<(Rational, &PAConcave)> =
                    pas.iter().map(|(w, f)| (w.clone(), f)).collect();
                Roof::Pa(linear_combination(&refs)?)
            }
        };
        Ok((per_place, global))
    }

    pub fn is_semipositive(&self) -> bool {
        self.fan_concave
    }

    /// Essential minimum: maximum of the global roof.
    pub fn mu_ess(&self) -> Result<LogLinear> {
        let (_, global) = self.roof_functions()?;
        match global {
            Roof::Pa(f) => Ok(LogLinear::from_rational(f.maximize().0)),
            Roof::Affine { u, c } => {
                let delta = self.delta_required()?;
                Ok(delta
                    .vertices
                    .iter()
                    .map(|w| ll_affine_eval(&u, &c, w))
                    .reduce(LogLinear::max_exact)
                    .expect("polytope has a vertex"))
            }
        }
    }

    /// Absolute minimum (semipositive divisors): min of the global roof.
    pub fn mu_abs(&self) -> Result<LogLinear> {
        if !self.is_semipositive() {
            return Err(Error::NotSemipositive(
                "absolute minimum is only defined for semipositive divisors".into(),
            ));
        }
        let (_, global) = self.roof_functions()?;
        let delta = self.delta_required()?;
        match global {
            // a concave min over a polytope is attained at a vertex
            Roof::Pa(f) => Ok(LogLinear::from_rational(
                delta
                    .vertices
                    .iter()
                    .map(|w| f.evaluate(w).expect("vertex in domain"))
                    .min()
                    .expect("polytope has a vertex"),
            )),
            Roof::Affine { u, c } => Ok(delta
                .vertices
                .iter()
                .map(|w| ll_affine_eval(&u, &c, w))
                .reduce(LogLinear::min_exact)
                .expect("polytope has a vertex")),
        }
    }

    pub fn minima(&self) -> Result<(LogLinear, Option<LogLinear>)> {
        let ess = self.mu_ess()?;
        let abs = if self.is_semipositive() {
            Some(self.mu_abs()?)
        } else {
            None
        };
        Ok((ess, abs))
    }

    /// vol, vol̂ = (d+1)!∫_{Γ}ϑ, vol̂_χ = (d+1)!∫_{Δ}ϑ, and Γ_D = S_0(ϑ).
    pub fn volumes(&self) -> Result<Volumes> {
        let delta = self.delta_required()?;
        let d = self.dim;
        let dfact: Rational = (1..=d as i64)
            .map(|k| Rational::from_integer(k.into()))
            .product();
        let dp1fact = &dfact * Rational::from_integer(((d + 1) as i64).into());
        let vol = &dfact * delta.volume();
        let (_, global) = self.roof_functions()?;
        match global {
            Roof::Pa(f) => {
                let chihat = &dp1fact * f.integral();
                let gamma = match f.sup_level(&Rational::zero()) {
                    Ok(g) => Some(g),
                    Err(Error::LevelAboveMax(_)) => None,
                    Err(e) => return Err(e),
                };
                let hat = match &gamma {
                    Some(g) if g.is_fulldim() => {
                        let restricted = PAConcave::new(g.clone(), f.pieces.clone())?;
                        &dp1fact * restricted.integral()
                    }
                    _ => Rational::zero(),
                };
                Ok(Volumes {
                    vol,
                    vol_hat: LogLinear::from_rational(hat),
                    vol_chihat: LogLinear::from_rational(chihat),
                    gamma,
                })
            }
            Roof::Affine { u, c } => {
                // ∫(⟨u,x⟩ + c) = ⟨u, vol·centroid⟩ + c·vol, exactly
                let moments = polytope_moments(delta);
                let mut integral = c.scale(&delta.volume());
                for (ui, mi) in u.iter().zip(&moments) {
                    integral += ui.scale(mi);
                }
                let chihat = integral.scale(&dp1fact);
                // Γ is rational only when the roof has constant sign on Δ
                let vals: Vec<LogLinear> = delta
                    .vertices
                    .iter()
                    .map(|w| ll_affine_eval(&u, &c, w))
                    .collect();
                let max = vals.iter().cloned().reduce(LogLinear::max_exact).unwrap();
                let min = vals.iter().cloned().reduce(LogLinear::min_exact).unwrap();
                if min.sign() >= 0 {
                    Ok(Volumes {
                        vol,
                        vol_hat: chihat.clone(),
                        vol_chihat: chihat,
                        gamma: Some(delta.clone()),
                    })
                } else if max.sign() <= 0 {
                    // the roof is ≤ 0, so Γ carries no volume
                    Ok(Volumes {
                        vol,
                        vol_hat: LogLinear::zero(),
                        vol_chihat: chihat,
                        gamma: None,
                    })
                } else {
                    Err(Error::Semantic(
                        "nonnegativity region of a log-coefficient roof is not a rational polytope"
                            .into(),
                    ))
                }
            }
        }
    }

    pub fn positivity(&self) -> Result<PositivityFlags> {
        let semipositive = self.is_semipositive();
        if self.delta.is_none() {
            return Ok(PositivityFlags {
                pseudo_effective: false,
                big: false,
                semipositive,
                nef: false,
            });
        }
        let ess = self.mu_ess()?;
        let delta = self.delta_required()?;
        let fulldim = delta.is_fulldim();
        let pseudo_effective = ess.sign() >= 0;
        let big = fulldim && ess.sign() > 0;
        let nef = semipositive && {
            let abs = self.mu_abs()?;
            abs.sign() >= 0
        };
        Ok(PositivityFlags {
            pseudo_effective,
            big,
            semipositive,
            nef,
        })
    }

    /// Zhang-type comparison: max of ϑ against its means over Δ_D and Γ_D.
    pub fn zhang_check(&self) -> Result<ZhangReport> {
        let delta = self.delta_required()?;
        if !delta.is_fulldim() {
            return Err(Error::Semantic(
                "comparison against the mean needs a full-dimensional polytope".into(),
            ));
        }
        let mu_ess = self.mu_ess()?;
        let vols = self.volumes()?;
        let d = self.dim;
        let dp1fact: Rational = (1..=(d + 1) as i64)
            .map(|k| Rational::from_integer(k.into()))
            .product();
        let mean_delta = vols
            .vol_chihat
            .scale(&(dp1fact.recip() / delta.volume()));
        let mean_gamma = match &vols.gamma {
            Some(g) if g.is_fulldim() => {
                Some(vols.vol_hat.scale(&(dp1fact.recip() / g.volume())))
            }
            _ => None,
        };
        let equality = (mu_ess.clone() - mean_delta.clone()).is_zero();
        Ok(ZhangReport {
            mu_ess,
            mean_delta,
            mean_gamma,
            equality,
        })
    }

    /// Metric-side function ψ_v with log-linear constants, evaluable at
    /// log-linear points (semipositive divisors).
    pub fn metric_fn(&self, name: &str) -> Result<MetricFn> {
        if !self.is_semipositive() {
            return Err(Error::NotSemipositive(
                "metric evaluation needs concave support data".into(),
            ));
        }
        let delta = self.delta_required()?;
        let (_, datum) = self
            .place(name)
            .ok_or_else(|| Error::Semantic(format!("unknown place {name:?}")))?;
        self.metric_fn_of(datum, delta)
    }

    /// Metric function for an arbitrary place name, defaulting to canonical
    /// when the divisor carries no datum there.
    pub fn metric_fn_or_canonical(&self, name: &str) -> Result<MetricFn> {
        if self.place(name).is_some() {
            self.metric_fn(name)
        } else {
            if !self.is_semipositive() {
                return Err(Error::NotSemipositive(
                    "metric evaluation needs concave support data".into(),
                ));
            }
            let delta = self.delta_required()?;
            self.metric_fn_of(&PlaceDatum::Canonical, delta)
        }
    }

    fn metric_fn_of(&self, datum: &PlaceDatum, delta: &Polytope) -> Result<MetricFn> {
        let pieces = match datum {
            PlaceDatum::Canonical => delta
                .vertices
                .iter()
                .map(|w| (w.clone(), LogLinear::zero()))
                .collect(),
            PlaceDatum::Metric(fam) => fam
                .forms
                .iter()
                .map(|f| {
                    (
                        f.gradient.clone(),
                        LogLinear::from_rational(f.constant.clone()),
                    )
                })
                .collect(),
            PlaceDatum::Roof(f) => roof_to_metric(f)?
                .forms
                .iter()
                .map(|g| {
                    (
                        g.gradient.clone(),
                        LogLinear::from_rational(g.constant.clone()),
                    )
                })
                .collect(),
            PlaceDatum::Shift { u, c } => delta
                .vertices
                .iter()
                .map(|w| {
                    // ψ(x) = min_w ⟨w, x − u⟩ − c
                    let mut constant = -c.clone();
                    for (wi, ui) in w.iter().zip(u) {
                        constant += ui.scale(&-wi.clone());
                    }
                    (w.clone(), constant)
                })
                .collect(),
        };
        Ok(MetricFn {
            pieces,
            dim: self.dim,
        })
    }

    /// Twist by t·[∞]: shifts the archimedean roof by −t, so ϑ ↦ ϑ − t.
    pub fn twist(&self, t: &Rational) -> Result<ToricAdelicDivisor> {
        let mut places = self.places.clone();
        let arch = places
            .iter_mut()
            .find(|(p, _)| p.kind == PlaceKind::Archimedean)
            .ok_or_else(|| Error::Semantic("twist needs an archimedean place".into()))?;
        arch.1 = match &arch.1 {
            PlaceDatum::Canonical => PlaceDatum::Shift {
                u: vec![LogLinear::zero(); self.dim],
                c: LogLinear::from_rational(-t.clone()),
            },
            PlaceDatum::Roof(f) => PlaceDatum::Roof(f.add_constant(&-t.clone())),
            PlaceDatum::Metric(fam) => {
                // ψ ↦ ψ + t dualizes to ϑ − t
                let forms = fam
                    .forms
                    .iter()
                    .map(|f| AffineForm::new(f.gradient.clone(), &f.constant + t))
                    .collect();
                PlaceDatum::Metric(AffineFamily::new(self.dim, forms)?)
            }
            PlaceDatum::Shift { u, c } => PlaceDatum::Shift {
                u: u.clone(),
                c: c.clone() - LogLinear::from_rational(t.clone()),
            },
        };
        ToricAdelicDivisor::new(self.dim, self.mode, self.support.clone(), places)
    }

    /// Union of place names across divisors, in first-seen order, with
    /// weight agreement enforced.
    pub(crate) fn union_places(divs: &[&ToricAdelicDivisor]) -> Result<Vec<(String, Rational)>> {
        let mut out: Vec<(String, Rational)> = Vec::new();
        for d in divs {
            for (p, _) in &d.places {
                match out.iter().find(|(n, _)| *n == p.name) {
                    None => out.push((p.name.clone(), p.weight.clone())),
                    Some((_, w)) if *w == p.weight => {}
                    Some(_) => {
                        return Err(Error::Semantic(format!(
                            "place {:?} has conflicting weights",
                            p.name
                        )));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// First moments ∫_Δ x_i dx via triangulation (simplex integral of a linear
/// function = volume × centroid value).
fn polytope_moments(delta: &Polytope) -> Vector {
    let d = delta.ambient;
    let mut out = zeros(d);
    if !delta.is_fulldim() {
        return out;
    }
    let dfact: Rational = (1..=d as i64)
        .map(|k| Rational::from_integer(k.into()))
        .product();
    let dp1 = Rational::from_integer(((d + 1) as i64).into());
    for simplex in polytope::triangulate(&delta.vertices) {
        let rows: Vec<Vector> = simplex[1..].iter().map(|v| vsub(v, &simplex[0])).collect();
        let vol = crate::exactgeom::linalg::det(&rows).abs() / &dfact;
        for i in 0..d {
            let centroid: Rational =
                simplex.iter().map(|v| v[i].clone()).sum::<Rational>() / &dp1;
            out[i] += &vol * centroid;
        }
    }
    out
}

/// max over `domain` of (f − g) for concave piecewise-affine f, g; linear
/// programming piece-region by piece-region of g.
pub fn max_difference(f: &PAConcave, g: &PAConcave, domain: &Polytope) -> Result<Rational> {
    use crate::exactgeom::lp::{self, Constraint, LpResult};
    let d = domain.ambient;
    let mut best: Option<Rational> = None;
    for (j, gj) in g.pieces.iter().enumerate() {
        let mut cs: Vec<Constraint> = Vec::new();
        for (a, b) in &domain.halfspaces {
            let mut row = a.clone();
            row.push(Rational::zero());
            cs.push((row, b.clone()));
        }
        for (k, gk) in g.pieces.iter().enumerate() {
            if k != j {
                let mut row = vsub(&gj.gradient, &gk.gradient);
                row.push(Rational::zero());
                cs.push((row, &gk.constant - &gj.constant));
            }
        }
        for fi in &f.pieces {
            // t ≤ f_i − g_j
            let mut row = vsub(&gj.gradient, &fi.gradient);
            row.push(Rational::from_integer(1.into()));
            cs.push((row, &fi.constant - &gj.constant));
        }
        let mut obj = zeros(d + 1);
        obj[d] = Rational::from_integer(1.into());
        match lp::maximize(&obj, &cs) {
            LpResult::Optimal { value, .. } => {
                best = Some(match best {
                    None => value,
                    Some(b) => b.max(value),
                });
            }
            LpResult::Infeasible => continue, // region of piece j misses the domain
            LpResult::Unbounded { .. } => return Err(Error::Unbounded),
        }
    }
    best.ok_or(Error::Infeasible)
}

/// Pseudo-effectivity of self − other: polytope containment plus place-wise
/// roof domination, for semipositive data.
pub fn dominates(d: &ToricAdelicDivisor, e: &ToricAdelicDivisor) -> Result<bool> {
    if !e.is_semipositive() {
        return Err(Error::NotSemipositive(
            "domination test needs a semipositive subtrahend".into(),
        ));
    }
    let delta_e = match e.delta() {
        Some(p) => p,
        None => return Ok(true), // nothing to dominate
    };
    let delta_d = match d.delta() {
        Some(p) => p,
        None => return Ok(false),
    };
    if !delta_e.vertices.iter().all(|v| delta_d.contains(v)) {
        return Ok(false);
    }
    let names = ToricAdelicDivisor::union_places(&[d, e])?;
    for (name, _) in &names {
        let rd = d.roof_or_canonical(name)?;
        let re = e.roof_or_canonical(name)?;
        match (&re, &rd) {
            (Roof::Pa(fe), Roof::Pa(fd)) => {
                if max_difference(fe, fd, delta_e)?.is_positive() {
                    return Ok(false);
                }
            }
            (Roof::Affine { u: ue, c: ce }, Roof::Affine { u: ud, c: cd }) => {
                for w in &delta_e.vertices {
                    let diff = ll_affine_eval(ue, ce, w) - ll_affine_eval(ud, cd, w);
                    if diff.sign() > 0 {
                        return Ok(false);
                    }
                }
            }
            (Roof::Affine { u, c }, Roof::Pa(fd)) if ll_is_rational(u) && c.is_rational() => {
                let grad: Vector = u.iter().map(|x| x.rational.clone()).collect();
                let fe = PAConcave::new(
                    delta_e.clone(),
                    vec![AffineForm::new(grad, c.rational.clone())],
                )?;
                if max_difference(&fe, fd, delta_e)?.is_positive() {
                    return Ok(false);
                }
            }
            _ => {
                return Err(Error::Semantic(
                    "cannot compare piecewise data against log-coefficient roofs".into(),
                ));
            }
        }
    }
    Ok(true)
}

impl ToricAdelicDivisor {
    pub fn roof_or_canonical(&self, name: &str) -> Result<Roof> {
        if self.place(name).is_some() {
            self.roof_of(name)
        } else {
            let delta = self.delta_required()?.clone();
            Ok(Roof::Pa(PAConcave::constant(delta, Rational::zero())))
        }
    }
}

/// Arithmetic intersection number (D̄_0 ⋯ D̄_d) = Σ_v n_v·MI(ϑ_{0,v},…,ϑ_{d,v})
/// for semipositive rational divisors sharing the ambient dimension.
pub fn intersection_number(divs: &[&ToricAdelicDivisor]) -> Result<Rational> {
    let d = match divs.first() {
        Some(x) => x.dim,
        None => return Err(Error::EmptyInput),
    };
    if divs.len() != d + 1 {
        return Err(Error::WrongCount {
            expected: d + 1,
            got: divs.len(),
        });
    }
    for x in divs {
        if x.dim != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.dim,
            });
        }
        if !x.is_semipositive() {
            return Err(Error::NotSemipositive(
                "intersection numbers need semipositive divisors".into(),
            ));
        }
        if x.has_log_data() {
            return Err(Error::Semantic(
                "intersection numbers are implemented for rational data".into(),
            ));
        }
    }
    let names = ToricAdelicDivisor::union_places(divs)?;
    let mut total = Rational::zero();
    for (name, weight) in &names {
        let roofs: Vec<PAConcave> = divs
            .iter()
            .map(|x| match x.roof_or_canonical(name)? {
                Roof::Pa(f) => Ok(f),
                Roof::Affine { .. } => unreachable!("rational divisors"),
            })
            .collect::<Result<_>>()?;
        let refs: Vec<&PAConcave> = roofs.iter().collect();
        total += weight * crate::concave::mixed_integral(&refs)?;
    }
    Ok(total)
}

/// Geometric companion: (D_1⋯D_d) = MV(Δ_1,…,Δ_d).
pub fn geometric_intersection(divs: &[&ToricAdelicDivisor]) -> Result<Rational> {
    let deltas: Vec<Polytope> = divs
        .iter()
        .map(|x| x.delta_required().cloned())
        .collect::<Result<_>>()?;
    mixed_volume(&deltas)
}

/// Shifted-canonical upper bound: from a balanced family (u_v) at a point x₀
/// of the max face, builds the divisor with data (u_v, c_v = ϑ_v(x₀) −
/// ⟨u_v,x₀⟩); it dominates the input and its essential and absolute minima
/// both equal the input's essential minimum. All three claims are verified
/// exactly before returning.
pub fn tilde_upper_bound(div: &ToricAdelicDivisor) -> Result<ToricAdelicDivisor> {
    if !div.is_semipositive() {
        return Err(Error::NotSemipositive(
            "the upper-bound construction needs a semipositive divisor".into(),
        ));
    }
    if div.has_log_data() {
        return Err(Error::Semantic(
            "the upper-bound construction is implemented for rational data".into(),
        ));
    }
    let delta = div.delta_required()?;
    if !delta.is_fulldim() {
        return Err(Error::Semantic(
            "the upper-bound construction needs a full-dimensional polytope".into(),
        ));
    }
    let bg = crate::equidist::balanced_gradients(div)?;
    let x0 = &bg.base_point;
    let (per_place, global) = div.roof_functions()?;
    let mu = match &global {
        Roof::Pa(f) => f.maximize().0,
        Roof::Affine { .. } => unreachable!("rational divisor"),
    };
    let mut places = Vec::new();
    for (((p, _), (_, roof)), uv) in div.places.iter().zip(&per_place).zip(&bg.gradients) {
        let uv_rat: Vector = uv
            .iter()
            .map(|x| {
                x.as_rational()
                    .cloned()
                    .ok_or_else(|| Error::Internal("rational divisor produced log gradient".into()))
            })
            .collect::<Result<_>>()?;
        let theta_x0 = match roof {
            Roof::Pa(f) => f.evaluate(x0)?,
            Roof::Affine { .. } => unreachable!(),
        };
        let c = theta_x0 - dot(&uv_rat, x0);
        places.push((
            p.clone(),
            PlaceDatum::Shift {
                u: uv_rat.iter().map(|x| LogLinear::from_rational(x.clone())).collect(),
                c: LogLinear::from_rational(c),
            },
        ));
    }
    let tilde = ToricAdelicDivisor::new(div.dim, div.mode, div.support.clone(), places)?;
    // exact verification of the construction's three guarantees
    let ess = tilde.mu_ess()?;
    let abs = tilde.mu_abs()?;
    let target = LogLinear::from_rational(mu);
    if !(ess.clone() - target.clone()).is_zero() || !(abs - target).is_zero() {
        return Err(Error::Internal(
            "upper-bound divisor does not attain the expected minima".into(),
        ));
    }
    if !dominates(&tilde, div)? {
        return Err(Error::Internal(
            "upper-bound divisor fails to dominate the input".into(),
        ));
    }
    Ok(tilde)
}

/// Standard places for rational-field mode: one archimedean plus the given
/// primes, all weight 1.
pub fn q_places(primes: &[u64]) -> Vec<Place> {
    let mut out = vec![Place {
        name: "inf".into(),
        kind: PlaceKind::Archimedean,
        weight: Rational::from_integer(1.into()),
    }];
    for p in primes {
        out.push(Place {
            name: p.to_string(),
            kind: PlaceKind::NonArchimedean(*p),
            weight: Rational::from_integer(1.into()),
        });
    }
    out
}
