//! Height computations for radical points x = r^{1/n} on the line, plus the
//! small-sequence construction that witnesses convergence of heights to the
//! essential minimum and of twisted heights to the derivative.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::equidist::{balanced_gradients, derivative_essmin};
use crate::error::{Error, Result};
use crate::scalar::{padic_valuation, rat_int, support_primes, LogLinear, Rational};
use crate::toric::{Mode, PlaceKind, ToricAdelicDivisor};

/// The algebraic point r^{1/n} (any n-th root; heights average conjugates,
/// so the choice does not matter).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootPoint {
    pub r: Rational,
    pub n: u64,
}

impl RootPoint {
    pub fn new(r: Rational, n: u64) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::ZeroRadicand);
        }
        if n == 0 {
            return Err(Error::Semantic("root index must be positive".into()));
        }
        Ok(RootPoint { r, n })
    }

    /// val_v(x) = −(1/n)·log|r|_v as an exact log-linear number.
    pub fn valuation_at(&self, kind: &PlaceKind) -> LogLinear {
        let n = rat_int(self.n as i64);
        match kind {
            PlaceKind::Archimedean => (-LogLinear::log_abs(&self.r)).scale(&n.recip()),
            PlaceKind::NonArchimedean(p) => {
                LogLinear::log_prime(*p, rat_int(padic_valuation(&self.r, *p)) / n)
            }
            PlaceKind::Abstract => LogLinear::zero(),
        }
    }
}

/// Height of r^{1/n} against a semipositive divisor on the line:
/// h(x) = −Σ_v ψ_v(val_v(x)), summed over the divisor's places together with
/// the primes in the support of r (canonical metric there).
pub fn height(div: &ToricAdelicDivisor, pt: &RootPoint) -> Result<LogLinear> {
    if div.mode != Mode::Q {
        return Err(Error::NotQMode);
    }
    if div.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: div.dim,
        });
    }
    let mut entries: Vec<(String, PlaceKind)> = div
        .places
        .iter()
        .map(|(p, _)| (p.name.clone(), p.kind.clone()))
        .collect();
    let known: BTreeSet<u64> = div
        .places
        .iter()
        .filter_map(|(p, _)| match p.kind {
            PlaceKind::NonArchimedean(q) => Some(q),
            _ => None,
        })
        .collect();
    for q in support_primes(&pt.r) {
        if !known.contains(&q) {
            entries.push((format!("extra:{q}"), PlaceKind::NonArchimedean(q)));
        }
    }
    let mut total = LogLinear::zero();
    for (name, kind) in &entries {
        let val = pt.valuation_at(kind);
        let psi = div.metric_fn_or_canonical(name)?;
        total += psi.eval(&[val]);
    }
    Ok(-total)
}

/// Absolute logarithmic Weil height of r^{1/n}: Σ_v max(0, log|x|_v).
pub fn weil_height(pt: &RootPoint) -> LogLinear {
    let n = rat_int(pt.n as i64);
    let mut total = LogLinear::max_exact(
        LogLinear::zero(),
        LogLinear::log_abs(&pt.r).scale(&n.recip()),
    );
    for q in support_primes(&pt.r) {
        let log_abs_q = LogLinear::log_prime(q, -rat_int(padic_valuation(&pt.r, q)) / &n);
        total += LogLinear::max_exact(LogLinear::zero(), log_abs_q);
    }
    total
}

/// Small generic sequence adapted to a wide divisor whose balanced gradients
/// at the prime places are rational multiples of the matching log p: with
/// u_p = (a_p/b_p)·log p and B = lcm(b_p), the k-th point is
/// (Π p^{a_p·(B/b_p)·(k+1)})^{1/(kB)}, whose valuation profile tends to the
/// balanced family place by place.
pub fn small_sequence(div: &ToricAdelicDivisor, length: usize) -> Result<Vec<RootPoint>> {
    if div.mode != Mode::Q {
        return Err(Error::NotQMode);
    }
    if div.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: div.dim,
        });
    }
    let bg = balanced_gradients(div)?;
    if !bg.wide {
        return Err(Error::NotWide);
    }
    let mut targets: Vec<(u64, i64, i64)> = Vec::new(); // (prime, a, b)
    for ((p, _), u) in div.places.iter().zip(&bg.gradients) {
        let PlaceKind::NonArchimedean(q) = p.kind else {
            continue;
        };
        let uq = &u[0];
        if !uq.rational.is_zero() || uq.logs.keys().any(|k| *k != q) {
            return Err(Error::UnrealizableProfile(format!(
                "gradient at place {:?} is not a rational multiple of log {q}",
                p.name
            )));
        }
        let coeff = uq.logs.get(&q).cloned().unwrap_or_else(Rational::zero);
        if coeff.is_zero() {
            continue;
        }
        let a = coeff.numer().to_i64().ok_or_else(|| {
            Error::UnrealizableProfile("gradient coefficient too large".into())
        })?;
        let b = coeff.denom().to_i64().ok_or_else(|| {
            Error::UnrealizableProfile("gradient coefficient too large".into())
        })?;
        targets.push((q, a, b));
    }
    let big_b: i64 = targets.iter().fold(1i64, |acc, (_, _, b)| acc.lcm(b));
    let mut out = Vec::with_capacity(length);
    for k in 1..=length as i64 {
        let r = if targets.is_empty() {
            // trivial profile: 2^{1/(kB)} drifts to valuation zero everywhere
            rat_int(2)
        } else {
            let mut r = rat_int(1);
            for (q, a, b) in &targets {
                let e = a * (big_b / b) * (k + 1);
                let pw = Rational::from_integer((*q as i64).into());
                r *= if e >= 0 {
                    crate::scalar::rational_pow(&pw, e as u32)
                } else {
                    crate::scalar::rational_pow(&pw, (-e) as u32).recip()
                };
            }
            r
        };
        out.push(RootPoint::new(r, (k * big_b) as u64)?);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub k: usize,
    pub point: RootPoint,
    pub h_d: LogLinear,
    pub h_e: LogLinear,
    /// h_D(x_k) − μess(D̄), nonnegative and O(1/k)
    pub gap: LogLinear,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub mu_ess: LogLinear,
    /// derivative of the essential minimum along Ē, the limit of h_Ē(x_k)
    pub derivative: LogLinear,
    /// certificate C with gap_k ≤ C/k over the computed range
    pub constant: LogLinear,
}

/// Runs the convergence experiment: heights of the small sequence against D̄
/// approach μess(D̄), heights against Ē approach the derivative along Ē.
pub fn convergence_experiment(
    d_bar: &ToricAdelicDivisor,
    e_bar: &ToricAdelicDivisor,
    length: usize,
) -> Result<ConvergenceReport> {
    if length == 0 {
        return Err(Error::EmptyInput);
    }
    let mu_ess = d_bar.mu_ess()?;
    let derivative = derivative_essmin(d_bar, e_bar)?;
    let points = small_sequence(d_bar, length)?;
    let mut rows = Vec::with_capacity(length);
    let mut constant = LogLinear::zero();
    for (i, point) in points.into_iter().enumerate() {
        let k = i + 1;
        let h_d = height(d_bar, &point)?;
        let h_e = height(e_bar, &point)?;
        let gap = h_d.clone() - mu_ess.clone();
        if gap.sign() < 0 {
            return Err(Error::Internal(
                "small-sequence height fell below the essential minimum".into(),
            ));
        }
        constant = LogLinear::max_exact(constant, gap.scale(&rat_int(k as i64)));
        rows.push(ConvergenceRow {
            k,
            point,
            h_d,
            h_e,
            gap,
        });
    }
    Ok(ConvergenceReport {
        rows,
        mu_ess,
        derivative,
        constant,
    })
}
