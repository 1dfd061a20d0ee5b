//! Equidistribution layer: wideness, balanced gradient families, limit
//! measures, derivatives of the essential minimum, and Gauss–Mahler measures
//! of Laurent polynomials against the shifted limit measures.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::concave::{sup_differential, zero_is_vertex, PAConcave};
use crate::error::{Error, Result};
use crate::exactgeom::lp::{self, Constraint, LpResult};
use crate::exactgeom::{zeros, Vector};
use crate::scalar::{
    padic_valuation, rat_int, support_primes, LogLinear, Rational,
};
use crate::toric::{Mode, PlaceDatum, PlaceKind, Roof, ToricAdelicDivisor};

/// A balanced family of gradients at a point of the max face: one vector per
/// place of the divisor (same order), u_v in the superdifferential of ϑ_v at
/// the base point, zero at canonical places, Σ n_v·u_v = 0.
#[derive(Clone, Debug)]
pub struct BalancedGradients {
    pub base_point: Vector,
    pub mu_ess: LogLinear,
    pub gradients: Vec<Vec<LogLinear>>,
    pub wide: bool,
    /// Some(true/false) when uniqueness was decidable (rational data), or
    /// implied by wideness.
    pub unique: Option<bool>,
}

impl BalancedGradients {
    pub fn by_name<'a>(&'a self, div: &ToricAdelicDivisor) -> BTreeMap<String, &'a [LogLinear]> {
        div.places
            .iter()
            .zip(&self.gradients)
            .map(|((p, _), u)| (p.name.clone(), u.as_slice()))
            .collect()
    }
}

/// Wideness of a divisor: zero must be a vertex of the superdifferential of
/// the global roof at the max face. Returns a witness direction of thick
/// level-set decay when the answer is negative.
pub fn is_wide(div: &ToricAdelicDivisor) -> Result<(bool, Option<Vector>)> {
    let (_, global) = div.roof_functions()?;
    let (f, x0) = global_roof_base(div, &global)?;
    let sd = sup_differential(&f, &x0)?;
    zero_is_vertex(&sd)
}

/// Rational PA stand-in for the global roof plus a deterministic point of the
/// max face. Log-coefficient data must be balanced, making the roof constant.
fn global_roof_base(
    div: &ToricAdelicDivisor,
    global: &Roof,
) -> Result<(PAConcave, Vector)> {
    match global {
        Roof::Pa(f) => {
            let (_, x0, _) = f.maximize();
            Ok((f.clone(), x0))
        }
        Roof::Affine { u, c: _ } => {
            if !u.iter().all(|x| x.is_zero()) {
                return Err(Error::Semantic(
                    "shifted data with log coordinates must be balanced (weighted shifts sum to zero)"
                        .into(),
                ));
            }
            // constant roof: max face is the whole polytope
            let delta = div.delta_required()?.clone();
            let x0 = delta.vertices[0].clone(); // vertices are sorted
            Ok((PAConcave::constant(delta, Rational::zero()), x0))
        }
    }
}

/// Computes a balanced gradient family. Rational data goes through one
/// feasibility LP (lexicographically smallest family, so deterministic) plus
/// per-coordinate extremum LPs for the uniqueness report; shifted data with
/// log coordinates is its own balanced family.
pub fn balanced_gradients(div: &ToricAdelicDivisor) -> Result<BalancedGradients> {
    let d = div.dim;
    let (per_place, global) = div.roof_functions()?;
    let mu_ess = div.mu_ess()?;
    let (global_pa, x0) = global_roof_base(div, &global)?;
    let (wide, _) = zero_is_vertex(&sup_differential(&global_pa, &x0)?)?;

    if div.has_log_data() {
        // every place is canonical or shift; the shifts are the family
        let mut gradients = Vec::new();
        for (_, datum) in &div.places {
            gradients.push(match datum {
                PlaceDatum::Shift { u, .. } => u.clone(),
                _ => vec![LogLinear::zero(); d],
            });
        }
        return Ok(BalancedGradients {
            base_point: x0,
            mu_ess,
            gradients,
            wide,
            unique: if wide { Some(true) } else { None },
        });
    }

    // variable blocks for the non-canonical places
    let mut blocks: Vec<Option<usize>> = Vec::new(); // place index -> block
    let mut nblocks = 0usize;
    for (_, datum) in &div.places {
        if matches!(datum, PlaceDatum::Canonical) {
            blocks.push(None);
        } else {
            blocks.push(Some(nblocks));
            nblocks += 1;
        }
    }
    let nvars = nblocks * d;
    let mut cs: Vec<Constraint> = Vec::new();
    let embed = |block: usize, a: &[Rational]| {
        let mut row = zeros(nvars);
        row[block * d..block * d + d].clone_from_slice(a);
        row
    };
    for (i, (_, roof)) in per_place.iter().enumerate() {
        let Some(block) = blocks[i] else { continue };
        let Roof::Pa(f) = roof else {
            unreachable!("rational divisor has PA roofs")
        };
        let sd = sup_differential(f, &x0)?;
        for (a, b) in sd.halfspaces() {
            cs.push((embed(block, &a), b));
        }
    }
    // Σ n_v u_v = 0, one equality pair per coordinate
    for j in 0..d {
        let mut row = zeros(nvars);
        for (i, (p, _)) in div.places.iter().enumerate() {
            if let Some(block) = blocks[i] {
                row[block * d + j] = p.weight.clone();
            }
        }
        cs.push((row.clone(), Rational::zero()));
        cs.push((crate::exactgeom::vneg(&row), Rational::zero()));
    }
    let point = if nvars == 0 {
        Vector::new()
    } else {
        match lp::maximize_lex(&zeros(nvars), &cs) {
            LpResult::Optimal { point, .. } => point,
            LpResult::Infeasible => {
                return Err(Error::Internal(
                    "no balanced family with vanishing canonical gradients".into(),
                ));
            }
            LpResult::Unbounded { .. } => unreachable!("zero objective"),
        }
    };
    // uniqueness: each coordinate pinned iff its max and min over the
    // feasible region coincide
    let mut unique = true;
    'outer: for k in 0..nvars {
        let mut e = zeros(nvars);
        e[k] = Rational::from_integer(1.into());
        let hi = lp::maximize(&e, &cs);
        e[k] = Rational::from_integer((-1).into());
        let lo = lp::maximize(&e, &cs);
        match (hi, lo) {
            (
                LpResult::Optimal { value: vh, .. },
                LpResult::Optimal { value: vl, .. },
            ) => {
                if vh != -vl {
                    unique = false;
                    break 'outer;
                }
            }
            _ => {
                unique = false;
                break 'outer;
            }
        }
    }
    let mut gradients = Vec::new();
    for (i, _) in div.places.iter().enumerate() {
        gradients.push(match blocks[i] {
            None => vec![LogLinear::zero(); d],
            Some(b) => point[b * d..b * d + d]
                .iter()
                .map(|x| LogLinear::from_rational(x.clone()))
                .collect(),
        });
    }
    Ok(BalancedGradients {
        base_point: x0,
        mu_ess,
        gradients,
        wide,
        unique: Some(unique),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    /// Haar measure on the compact torus of valuation −u at an archimedean
    /// place.
    Haar,
    /// Dirac mass at the Gauss point shifted by u.
    Dirac,
}

#[derive(Clone, Debug)]
pub struct MeasureDescriptor {
    pub place: String,
    pub kind: MeasureKind,
    pub u: Vec<LogLinear>,
}

/// Limit measures of small generic sequences (wide divisors only): per place,
/// Haar on a shifted torus at archimedean places and a shifted Gauss point
/// elsewhere.
pub fn equidistribution_measures(div: &ToricAdelicDivisor) -> Result<Vec<MeasureDescriptor>> {
    let bg = balanced_gradients(div)?;
    if !bg.wide {
        return Err(Error::NotWide);
    }
    Ok(div
        .places
        .iter()
        .zip(&bg.gradients)
        .map(|((p, _), u)| MeasureDescriptor {
            place: p.name.clone(),
            kind: match p.kind {
                PlaceKind::Archimedean => MeasureKind::Haar,
                _ => MeasureKind::Dirac,
            },
            u: u.clone(),
        })
        .collect())
}

/// Derivative of the essential minimum of D̄ along Ē: −Σ_v n_v·ψ_{Ē,v}(u_v)
/// with (u_v) the balanced family of D̄ (wide D̄, semipositive Ē).
pub fn derivative_essmin(
    d_bar: &ToricAdelicDivisor,
    e_bar: &ToricAdelicDivisor,
) -> Result<LogLinear> {
    let bg = balanced_gradients(d_bar)?;
    if !bg.wide {
        return Err(Error::NotWide);
    }
    let grads = bg.by_name(d_bar);
    let zero_u = vec![LogLinear::zero(); d_bar.dim];
    let names = ToricAdelicDivisor::union_places(&[d_bar, e_bar])?;
    let mut total = LogLinear::zero();
    for (name, weight) in &names {
        let u = grads.get(name).copied().unwrap_or(&zero_u);
        let psi = e_bar.metric_fn_or_canonical(name)?;
        total += psi.eval(u).scale(weight);
    }
    Ok(-total)
}

// ---------------------------------------------------------------------------
// Laurent polynomials and Gauss–Mahler measures

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPolynomial {
    pub dim: usize,
    /// sorted by exponent vector; coefficients nonzero
    pub terms: Vec<(Vec<i64>, Rational)>,
}

impl LaurentPolynomial {
    pub fn new(dim: usize, terms: Vec<(Vec<i64>, Rational)>) -> Result<Self> {
        let mut map: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.len(),
                });
            }
            *map.entry(e).or_insert_with(Rational::zero) += c;
        }
        let terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(LaurentPolynomial { dim, terms })
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Writes a two-term f as α·χ^a·(χ^m − γ) and returns (m, γ).
    pub fn as_binomial(&self) -> Option<(Vec<i64>, Rational)> {
        if self.terms.len() != 2 {
            return None;
        }
        let (a_lo, c_lo) = &self.terms[0];
        let (a_hi, c_hi) = &self.terms[1];
        let m: Vec<i64> = a_hi.iter().zip(a_lo).map(|(h, l)| h - l).collect();
        let gamma = -(c_lo / c_hi);
        Some((m, gamma))
    }
}

/// Parses things like "x - 2", "3*x^2*y^-1 + 1/2", with variables x, y, z, w.
pub fn parse_laurent(input: &str, dim: usize) -> Result<LaurentPolynomial> {
    if dim == 0 || dim > 4 {
        return Err(Error::Parse("polynomial parser supports 1 to 4 variables".into()));
    }
    let bytes: Vec<char> = input.chars().collect();
    let mut i = 0usize;
    let mut terms: Vec<(Vec<i64>, Rational)> = Vec::new();
    let skip_ws = |i: &mut usize| {
        while *i < bytes.len() && bytes[*i].is_whitespace() {
            *i += 1;
        }
    };
    let mut sign = Rational::from_integer(1.into());
    let mut expect_term = true;
    loop {
        skip_ws(&mut i);
        if i >= bytes.len() {
            if expect_term {
                return Err(Error::Parse("trailing operator in polynomial".into()));
            }
            break;
        }
        if !expect_term {
            match bytes[i] {
                '+' => sign = Rational::from_integer(1.into()),
                '-' => sign = Rational::from_integer((-1).into()),
                c => return Err(Error::Parse(format!("unexpected character {c:?}"))),
            }
            i += 1;
            expect_term = true;
            continue;
        }
        // allow a unary sign at the start of a term
        if bytes[i] == '-' {
            sign = -sign;
            i += 1;
            skip_ws(&mut i);
        } else if bytes[i] == '+' {
            i += 1;
            skip_ws(&mut i);
        }
        let mut coeff = sign.clone();
        let mut exps = vec![0i64; dim];
        let mut saw_factor = false;
        loop {
            skip_ws(&mut i);
            if i < bytes.len() && bytes[i] == '*' {
                i += 1;
                skip_ws(&mut i);
            }
            if i >= bytes.len() {
                break;
            }
            let c = bytes[i];
            if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '/') {
                    i += 1;
                }
                let s: String = bytes[start..i].iter().collect();
                let q = crate::scalar::parse_rational(&s)?;
                coeff *= q;
                saw_factor = true;
            } else if let Some(var) = "xyzw".find(c) {
                if var >= dim {
                    return Err(Error::Parse(format!(
                        "variable {c:?} exceeds dimension {dim}"
                    )));
                }
                i += 1;
                let mut e = 1i64;
                skip_ws(&mut i);
                if i < bytes.len() && bytes[i] == '^' {
                    i += 1;
                    skip_ws(&mut i);
                    let start = i;
                    if i < bytes.len() && bytes[i] == '-' {
                        i += 1;
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let s: String = bytes[start..i].iter().collect();
                    e = s
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?;
                }
                exps[var] += e;
                saw_factor = true;
            } else {
                break;
            }
        }
        if !saw_factor {
            return Err(Error::Parse("empty term in polynomial".into()));
        }
        terms.push((exps, coeff));
        sign = Rational::from_integer(1.into());
        expect_term = false;
    }
    LaurentPolynomial::new(dim, terms)
}

#[derive(Clone, Debug)]
pub enum MahlerValue {
    Exact(LogLinear),
    Numeric { value: f64, error_bound: f64 },
}

impl MahlerValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            MahlerValue::Exact(x) => x.to_f64(),
            MahlerValue::Numeric { value, .. } => *value,
        }
    }

    pub fn error_bound(&self) -> f64 {
        match self {
            MahlerValue::Exact(_) => 0.0,
            MahlerValue::Numeric { error_bound, .. } => *error_bound,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MahlerOptions {
    pub quadrature_points: u64,
}

impl Default for MahlerOptions {
    fn default() -> Self {
        MahlerOptions {
            quadrature_points: 1 << 16,
        }
    }
}

fn ll_exponent_dot(u: &[LogLinear], m: &[i64]) -> LogLinear {
    let mut acc = LogLinear::zero();
    for (ui, mi) in u.iter().zip(m) {
        acc += ui.scale(&rat_int(*mi));
    }
    acc
}

/// Places relevant to f against D̄'s limit measures: D̄'s own places with
/// their balanced gradients, plus canonical places at the remaining primes of
/// the given rationals. Requires genuine absolute values.
fn relevant_places(
    div: &ToricAdelicDivisor,
    extra_rationals: &[&Rational],
) -> Result<Vec<(PlaceKind, Rational, Vec<LogLinear>)>> {
    if div.mode != Mode::Q {
        return Err(Error::NotQMode);
    }
    let bg = balanced_gradients(div)?;
    if !bg.wide {
        return Err(Error::NotWide);
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for ((p, _), u) in div.places.iter().zip(&bg.gradients) {
        if let PlaceKind::NonArchimedean(q) = p.kind {
            seen.insert(q);
        }
        out.push((p.kind.clone(), p.weight.clone(), u.clone()));
    }
    let zero_u = vec![LogLinear::zero(); div.dim];
    for r in extra_rationals {
        for q in support_primes(r) {
            if seen.insert(q) {
                out.push((
                    PlaceKind::NonArchimedean(q),
                    Rational::from_integer(1.into()),
                    zero_u.clone(),
                ));
            }
        }
    }
    Ok(out)
}

/// log|γ|_v for a place kind.
fn log_abs_at(kind: &PlaceKind, gamma: &Rational) -> LogLinear {
    match kind {
        PlaceKind::Archimedean => LogLinear::log_abs(gamma),
        PlaceKind::NonArchimedean(p) => {
            LogLinear::log_prime(*p, rat_int(-padic_valuation(gamma, *p)))
        }
        PlaceKind::Abstract => unreachable!("filtered by mode check"),
    }
}

/// Gauss–Mahler measure m_{D̄}(f) = Σ_v n_v ∫ log|f| dη_v against the shifted
/// limit measures. Monomials and binomials evaluate in closed form; otherwise
/// the archimedean integral is a torus quadrature with a reported error
/// heuristic, while non-archimedean contributions stay exact.
pub fn gauss_mahler(
    div: &ToricAdelicDivisor,
    f: &LaurentPolynomial,
    opts: &MahlerOptions,
) -> Result<MahlerValue> {
    if f.dim != div.dim {
        return Err(Error::DimensionMismatch {
            expected: div.dim,
            got: f.dim,
        });
    }
    if f.is_monomial() {
        // product formula kills |coefficient| and balance kills the exponent
        if div.mode != Mode::Q {
            return Err(Error::NotQMode);
        }
        let bg = balanced_gradients(div)?;
        if !bg.wide {
            return Err(Error::NotWide);
        }
        return Ok(MahlerValue::Exact(LogLinear::zero()));
    }
    if let Some((m, gamma)) = f.as_binomial() {
        let places = relevant_places(div, &[&gamma])?;
        let mut total = LogLinear::zero();
        for (kind, weight, u) in &places {
            let term = log_abs_at(kind, &gamma) - ll_exponent_dot(u, &m);
            total += LogLinear::max_exact(LogLinear::zero(), term).scale(weight);
        }
        return Ok(MahlerValue::Exact(total));
    }
    gauss_mahler_numeric(div, f, opts)
}

/// Gauss–Mahler measure with the archimedean integral always evaluated by
/// quadrature (used to cross-check the closed forms).
pub fn gauss_mahler_numeric(
    div: &ToricAdelicDivisor,
    f: &LaurentPolynomial,
    opts: &MahlerOptions,
) -> Result<MahlerValue> {
    if f.dim != div.dim {
        return Err(Error::DimensionMismatch {
            expected: div.dim,
            got: f.dim,
        });
    }
    let coeffs: Vec<&Rational> = f.terms.iter().map(|(_, c)| c).collect();
    let places = relevant_places(div, &coeffs)?;
    let mut exact = LogLinear::zero();
    let mut numeric = 0.0f64;
    let mut error_bound = 0.0f64;
    for (kind, weight, u) in &places {
        match kind {
            PlaceKind::NonArchimedean(_) => {
                // Gauss point: log|f|_v = max over terms of ⟨u,a⟩ + log|c_a|_v
                let best = f
                    .terms
                    .iter()
                    .map(|(a, c)| ll_exponent_dot(u, a) + log_abs_at(kind, c))
                    .reduce(LogLinear::max_exact)
                    .expect("nonzero polynomial");
                exact += best.scale(weight);
            }
            PlaceKind::Archimedean => {
                let radii: Vec<f64> = u.iter().map(|x| x.to_f64().exp()).collect();
                let (value, err) = torus_quadrature(f, &radii, opts.quadrature_points);
                let w = crate::scalar::rational_to_f64(weight);
                numeric += w * value;
                error_bound += w.abs() * err;
            }
            PlaceKind::Abstract => unreachable!("filtered by mode check"),
        }
    }
    Ok(MahlerValue::Numeric {
        value: exact.to_f64() + numeric,
        error_bound,
    })
}

/// Mahler measures add over products: m(Π f_i^{k_i}) = Σ k_i·m(f_i).
pub fn gauss_mahler_product(
    div: &ToricAdelicDivisor,
    factors: &[(LaurentPolynomial, i64)],
    opts: &MahlerOptions,
) -> Result<MahlerValue> {
    if factors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let parts: Vec<MahlerValue> = factors
        .iter()
        .map(|(f, _)| gauss_mahler(div, f, opts))
        .collect::<Result<_>>()?;
    if parts
        .iter()
        .all(|v| matches!(v, MahlerValue::Exact(_)))
    {
        let mut total = LogLinear::zero();
        for ((_, k), v) in factors.iter().zip(&parts) {
            let MahlerValue::Exact(x) = v else { unreachable!() };
            total += x.scale(&rat_int(*k));
        }
        Ok(MahlerValue::Exact(total))
    } else {
        let mut value = 0.0;
        let mut err = 0.0;
        for ((_, k), v) in factors.iter().zip(&parts) {
            value += (*k as f64) * v.to_f64();
            err += (*k as f64).abs() * v.error_bound();
        }
        Ok(MahlerValue::Numeric {
            value,
            error_bound: err,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eligibility {
    Eligible,
    NotEligible,
    Indeterminate,
}

/// Whether log|f| integrates to zero against the limit measures, i.e. whether
/// the equidistribution statement extends to the unbounded test function
/// log|f|. Exact for monomials and binomials; numeric otherwise, with
/// Indeterminate when the quadrature bound straddles zero.
pub fn log_equidistribution_eligible(
    div: &ToricAdelicDivisor,
    f: &LaurentPolynomial,
    opts: &MahlerOptions,
) -> Result<(Eligibility, MahlerValue)> {
    let m = gauss_mahler(div, f, opts)?;
    let e = match &m {
        MahlerValue::Exact(x) => {
            if x.is_zero() {
                Eligibility::Eligible
            } else {
                Eligibility::NotEligible
            }
        }
        MahlerValue::Numeric { value, error_bound } => {
            if value - error_bound > 0.0 {
                Eligibility::NotEligible
            } else {
                Eligibility::Indeterminate
            }
        }
    };
    Ok((e, m))
}

#[derive(Clone, Debug)]
pub struct TwistedDerivative {
    /// −Σ n_v ψ_{Ē,v}(u_v), the untwisted derivative along Ē
    pub base: LogLinear,
    /// Gauss–Mahler measure of the twisting rational function
    pub mahler: MahlerValue,
}

impl TwistedDerivative {
    pub fn total_f64(&self) -> f64 {
        self.base.to_f64() + self.mahler.to_f64()
    }
}

/// Derivative of the essential minimum along Ē twisted by div(f): the
/// metric term plus the Gauss–Mahler measure of f.
pub fn derivative_with_rational_twist(
    d_bar: &ToricAdelicDivisor,
    e_bar: &ToricAdelicDivisor,
    f: &LaurentPolynomial,
    opts: &MahlerOptions,
) -> Result<TwistedDerivative> {
    Ok(TwistedDerivative {
        base: derivative_essmin(d_bar, e_bar)?,
        mahler: gauss_mahler(d_bar, f, opts)?,
    })
}

// ---------------------------------------------------------------------------
// archimedean quadrature

#[derive(Clone, Copy)]
struct C(f64, f64);

impl C {
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }

    fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }

    fn powi(self, k: i64) -> C {
        if k == 0 {
            return C(1.0, 0.0);
        }
        let base = if k < 0 {
            let n = self.0 * self.0 + self.1 * self.1;
            C(self.0 / n, -self.1 / n)
        } else {
            self
        };
        let mut acc = C(1.0, 0.0);
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(base);
        }
        acc
    }
}

/// Mean of log|f| over the torus with the given radii on an n-point midpoint
/// grid per axis; also reports the smallest sampled |f| for the error
/// widening.
fn torus_mean_log(f: &LaurentPolynomial, radii: &[f64], n: usize) -> (f64, f64) {
    let d = f.dim;
    let coeffs: Vec<f64> = f
        .terms
        .iter()
        .map(|(_, c)| crate::scalar::rational_to_f64(c))
        .collect();
    let mut idx = vec![0usize; d];
    let mut sum = 0.0f64;
    let mut min_abs = f64::INFINITY;
    let total = n.pow(d as u32);
    for _ in 0..total {
        let zs: Vec<C> = (0..d)
            .map(|j| {
                let theta = std::f64::consts::TAU * (idx[j] as f64 + 0.5) / n as f64;
                C(radii[j] * theta.cos(), radii[j] * theta.sin())
            })
            .collect();
        let mut val = C(0.0, 0.0);
        for ((a, _), c) in f.terms.iter().zip(&coeffs) {
            let mut t = C(*c, 0.0);
            for (j, &aj) in a.iter().enumerate() {
                t = t.mul(zs[j].powi(aj));
            }
            val = C(val.0 + t.0, val.1 + t.1);
        }
        let m = val.abs();
        min_abs = min_abs.min(m);
        sum += m.max(1e-300).ln();
        // advance the multi-index
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
    (sum / total as f64, min_abs)
}

/// Torus quadrature of log|f| with a Richardson-style error heuristic,
/// widened when samples come near a zero of f.
fn torus_quadrature(f: &LaurentPolynomial, radii: &[f64], points: u64) -> (f64, f64) {
    let d = f.dim as u32;
    let per_axis = ((points as f64).powf(1.0 / d as f64).floor() as usize).max(4);
    let (fine, min_fine) = torus_mean_log(f, radii, per_axis);
    let (coarse, _) = torus_mean_log(f, radii, per_axis / 2);
    let scale: f64 = f
        .terms
        .iter()
        .map(|(_, c)| crate::scalar::rational_to_f64(c).abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut err = (fine - coarse).abs() + 1e-12 * (1.0 + fine.abs());
    if min_fine < 1e-9 * scale {
        // a sample nearly hit a zero of f; the grid mean is unreliable there
        err += (1.0 + (min_fine / scale).max(1e-300).ln().abs()) / (per_axis as f64);
    }
    (fine, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concave::AffineForm;
    use crate::exactgeom::polytope::hull;
    use crate::scalar::rat;
    use crate::toric::{q_places, PlaceDatum, SupportData, VirtualSupport};
    use crate::exactgeom::polytope::Cone;

    fn seg01() -> crate::exactgeom::polytope::Polytope {
        hull(&[vec![rat_int(0)], vec![rat_int(1)]]).unwrap()
    }

    fn canonical_p1() -> ToricAdelicDivisor {
        let fan = VirtualSupport {
            cones: vec![
                Cone::new(vec![vec![rat_int(1)]]),
                Cone::new(vec![vec![rat_int(-1)]]),
            ],
            linear_forms: vec![vec![rat_int(0)], vec![rat_int(1)]],
        };
        let places = q_places(&[2])
            .into_iter()
            .map(|p| (p, PlaceDatum::Canonical))
            .collect();
        ToricAdelicDivisor::new(1, Mode::Q, SupportData::Fan(fan), places).unwrap()
    }

    fn rational_shift_divisor() -> ToricAdelicDivisor {
        // ϑ_∞ = x/2, ϑ_2 = -x/2 on [0,1]
        let ps = q_places(&[2]);
        let places = vec![
            (
                ps[0].clone(),
                PlaceDatum::Shift {
                    u: vec![LogLinear::from_rational(rat(1, 2))],
                    c: LogLinear::zero(),
                },
            ),
            (
                ps[1].clone(),
                PlaceDatum::Shift {
                    u: vec![LogLinear::from_rational(rat(-1, 2))],
                    c: LogLinear::zero(),
                },
            ),
        ];
        ToricAdelicDivisor::from_polytope(Mode::Q, seg01(), places).unwrap()
    }

    fn log2_shift_divisor() -> ToricAdelicDivisor {
        // ψ_∞ = Ψ(u − log 2), ψ_2 = Ψ(u + log 2)
        let ps = q_places(&[2]);
        let l2 = LogLinear::log_prime(2, rat_int(1));
        let places = vec![
            (
                ps[0].clone(),
                PlaceDatum::Shift {
                    u: vec![l2.clone()],
                    c: LogLinear::zero(),
                },
            ),
            (
                ps[1].clone(),
                PlaceDatum::Shift {
                    u: vec![-l2],
                    c: LogLinear::zero(),
                },
            ),
        ];
        ToricAdelicDivisor::from_polytope(Mode::Q, seg01(), places).unwrap()
    }

    #[test]
    fn canonical_family_is_zero_and_wide() {
        let d = canonical_p1();
        let bg = balanced_gradients(&d).unwrap();
        assert!(bg.wide);
        assert_eq!(bg.unique, Some(true));
        assert!(bg
            .gradients
            .iter()
            .all(|u| u.iter().all(|x| x.is_zero())));
        let ms = equidistribution_measures(&d).unwrap();
        assert_eq!(ms[0].kind, MeasureKind::Haar);
        assert_eq!(ms[1].kind, MeasureKind::Dirac);
    }

    #[test]
    fn rational_shift_family() {
        let d = rational_shift_divisor();
        let bg = balanced_gradients(&d).unwrap();
        assert!(bg.wide);
        assert_eq!(bg.unique, Some(true));
        assert_eq!(bg.gradients[0][0].as_rational().unwrap(), &rat(1, 2));
        assert_eq!(bg.gradients[1][0].as_rational().unwrap(), &rat(-1, 2));
    }

    #[test]
    fn log_shift_family_and_derivative() {
        let d = log2_shift_divisor();
        let bg = balanced_gradients(&d).unwrap();
        assert!(bg.wide);
        let e = canonical_p1();
        let der = derivative_essmin(&d, &e).unwrap();
        // −(Ψ(log 2) + Ψ(−log 2)) = −(0 + (−log 2)) = log 2
        assert!((der - LogLinear::log_prime(2, rat_int(1))).is_zero());
    }

    #[test]
    fn tent_is_not_wide_but_balances() {
        let tent = PAConcave::new(
            seg01(),
            vec![
                AffineForm::new(vec![rat_int(1)], rat_int(0)),
                AffineForm::new(vec![rat_int(-1)], rat_int(1)),
            ],
        )
        .unwrap();
        let d = ToricAdelicDivisor::from_polytope(
            Mode::Q,
            seg01(),
            vec![(q_places(&[])[0].clone(), PlaceDatum::Roof(tent))],
        )
        .unwrap();
        // superdifferential at the peak is [-1,1]: zero is interior, not a vertex
        let (wide, _) = is_wide(&d).unwrap();
        assert!(!wide);
        assert!(matches!(
            equidistribution_measures(&d),
            Err(Error::NotWide)
        ));
        // a balanced family still exists: u = 0 at the single place
        let bg = balanced_gradients(&d).unwrap();
        assert_eq!(bg.base_point, vec![rat(1, 2)]);
        assert!(bg.gradients[0][0].is_zero());
    }

    #[test]
    fn mahler_closed_forms() {
        let d = log2_shift_divisor();
        let two = parse_laurent("x - 2", 1).unwrap();
        match gauss_mahler(&d, &two, &MahlerOptions::default()).unwrap() {
            MahlerValue::Exact(x) => assert!(x.is_zero()),
            other => panic!("expected exact, got {other:?}"),
        }
        let (e, _) =
            log_equidistribution_eligible(&d, &two, &MahlerOptions::default()).unwrap();
        assert_eq!(e, Eligibility::Eligible);
        // x − 3 picks up log 3 at ∞ (net) and log 2 at 2: total log 3
        let three = parse_laurent("x - 3", 1).unwrap();
        match gauss_mahler(&d, &three, &MahlerOptions::default()).unwrap() {
            MahlerValue::Exact(x) => {
                assert!((x - LogLinear::log_prime(3, rat_int(1))).is_zero())
            }
            other => panic!("expected exact, got {other:?}"),
        }
        // monomials measure zero
        let mono = parse_laurent("5x^3", 1).unwrap();
        assert!(matches!(
            gauss_mahler(&d, &mono, &MahlerOptions::default()).unwrap(),
            MahlerValue::Exact(x) if x.is_zero()
        ));
    }

    #[test]
    fn mahler_quadrature_matches_closed_form() {
        let d = canonical_p1();
        let f = parse_laurent("x - 2", 1).unwrap();
        let opts = MahlerOptions::default();
        let exact = match gauss_mahler(&d, &f, &opts).unwrap() {
            MahlerValue::Exact(x) => x.to_f64(),
            _ => unreachable!(),
        };
        assert!((exact - 2f64.ln()).abs() < 1e-12);
        match gauss_mahler_numeric(&d, &f, &opts).unwrap() {
            MahlerValue::Numeric { value, error_bound } => {
                assert!((value - exact).abs() < 1e-6, "value {value} vs {exact}");
                assert!((value - exact).abs() <= error_bound + 1e-9);
            }
            _ => unreachable!(),
        }
        // trinomial has no closed form; Jensen gives log 6 for (x-3)(x+2),
        // whose zeros stay off the unit torus so the quadrature converges fast
        let g = parse_laurent("x^2 - x - 6", 1).unwrap();
        match gauss_mahler(&d, &g, &opts).unwrap() {
            MahlerValue::Numeric { value, .. } => {
                assert!((value - 6f64.ln()).abs() < 1e-6, "got {value}");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn product_decomposition() {
        let d = canonical_p1();
        let opts = MahlerOptions::default();
        let f = parse_laurent("x - 2", 1).unwrap();
        let g = parse_laurent("x - 4", 1).unwrap();
        let total = gauss_mahler_product(&d, &[(f, 2), (g, 1)], &opts).unwrap();
        match total {
            MahlerValue::Exact(x) => {
                assert!((x - LogLinear::log_prime(2, rat_int(4))).is_zero())
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn parser_roundtrips() {
        let f = parse_laurent("3*x^2*y^-1 + 1/2 - y", 2).unwrap();
        assert_eq!(f.terms.len(), 3);
        assert_eq!(
            f.terms,
            vec![
                (vec![0, 0], rat(1, 2)),
                (vec![0, 1], rat_int(-1)),
                (vec![2, -1], rat_int(3)),
            ]
        );
        assert!(parse_laurent("x +", 1).is_err());
        assert!(parse_laurent("q", 1).is_err());
        assert!(parse_laurent("x - x", 1).is_err()); // zero polynomial
    }
}
