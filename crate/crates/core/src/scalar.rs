//! Exact scalars: arbitrary-precision rationals and log-linear numbers
//! `c0 + sum c_p * log p` with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational scalar. Always reduced, denominator positive.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "p/q" or "p".
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Renders as "p/q", or just "p" for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back through a scaled division for extreme magnitudes
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact integer power with rational exponent base, integer exponent.
pub fn rational_pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// p-adic valuation of a nonzero rational.
pub fn padic_valuation(r: &Rational, p: u64) -> i64 {
    assert!(!r.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut n = r.numer().abs();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = r.denom().clone();
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    v
}

/// Primes dividing numerator or denominator of a nonzero rational.
pub fn support_primes(r: &Rational) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = r.numer().abs() * r.denom();
    let mut p = 2u64;
    while n > BigInt::one() {
        let bp = BigInt::from(p);
        if (&n % &bp).is_zero() {
            out.push(p);
            while (&n % &bp).is_zero() {
                n /= &bp;
            }
        }
        if bp.pow(2) > n && n > BigInt::one() {
            // remaining factor is prime but may exceed u64; desk-scale inputs keep it small
            if let Some(q) = n.to_u64() {
                out.push(q);
                break;
            }
        }
        p += 1;
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Formal number `c0 + sum_p c_p * log p` with exact rational coefficients.
///
/// Sign is decidable: by unique factorization and the Lindemann theorem the
/// value vanishes only when every coefficient does, so interval refinement
/// of the logarithms always terminates.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LogLinear {
    pub rational: Rational,
    pub logs: BTreeMap<u64, Rational>,
}

impl LogLinear {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rational(r: Rational) -> Self {
        LogLinear {
            rational: r,
            logs: BTreeMap::new(),
        }
    }

    pub fn log_prime(p: u64, coeff: Rational) -> Self {
        let mut logs = BTreeMap::new();
        if !coeff.is_zero() {
            logs.insert(p, coeff);
        }
        LogLinear {
            rational: Rational::zero(),
            logs,
        }
    }

    /// `log |r|` of a nonzero rational as an exact log-linear number.
    pub fn log_abs(r: &Rational) -> Self {
        assert!(!r.is_zero());
        let mut out = LogLinear::zero();
        for p in support_primes(r) {
            let v = padic_valuation(r, p);
            if v != 0 {
                out.logs.insert(p, rat_int(v));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.logs.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.logs.is_empty()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.logs.is_empty() {
            Some(&self.rational)
        } else {
            None
        }
    }

    fn normalize(mut self) -> Self {
        self.logs.retain(|_, c| !c.is_zero());
        self
    }

    pub fn scale(&self, r: &Rational) -> Self {
        LogLinear {
            rational: &self.rational * r,
            logs: self
                .logs
                .iter()
                .map(|(p, c)| (*p, c * r))
                .collect::<BTreeMap<_, _>>(),
        }
        .normalize()
    }

    /// Exact sign: -1, 0 or +1.
    pub fn sign(&self) -> i32 {
        if self.logs.is_empty() {
            return if self.rational.is_zero() {
                0
            } else if self.rational.is_positive() {
                1
            } else {
                -1
            };
        }
        // nonzero by linear independence of {1} U {log p}; refine until decisive
        let mut bits = 64u32;
        loop {
            let (lo, hi) = self.bounds(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
            assert!(bits <= 1 << 20, "log-linear sign refinement diverged");
        }
    }

    /// Rational interval [lo, hi] containing the value, width about 2^-bits per term.
    fn bounds(&self, bits: u32) -> (Rational, Rational) {
        let mut lo = self.rational.clone();
        let mut hi = self.rational.clone();
        for (p, c) in &self.logs {
            let (llo, lhi) = log_bounds(*p, bits);
            let (tlo, thi) = if c.is_positive() {
                (c * &llo, c * &lhi)
            } else {
                (c * &lhi, c * &llo)
            };
            lo += tlo;
            hi += thi;
        }
        (lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        let mut v = rational_to_f64(&self.rational);
        for (p, c) in &self.logs {
            v += rational_to_f64(c) * (*p as f64).ln();
        }
        v
    }

    pub fn cmp_exact(&self, other: &Self) -> std::cmp::Ordering {
        match (self.clone() - other.clone()).sign() {
            1 => std::cmp::Ordering::Greater,
            -1 => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Equal,
        }
    }

    pub fn max_exact(a: Self, b: Self) -> Self {
        if a.cmp_exact(&b) == std::cmp::Ordering::Less {
            b
        } else {
            a
        }
    }

    pub fn min_exact(a: Self, b: Self) -> Self {
        if a.cmp_exact(&b) == std::cmp::Ordering::Greater {
            b
        } else {
            a
        }
    }
}

impl Add for LogLinear {
    type Output = LogLinear;
    fn add(mut self, rhs: LogLinear) -> LogLinear {
        self.rational += rhs.rational;
        for (p, c) in rhs.logs {
            *self.logs.entry(p).or_insert_with(Rational::zero) += c;
        }
        self.normalize()
    }
}

impl AddAssign for LogLinear {
    fn add_assign(&mut self, rhs: LogLinear) {
        *self = self.clone() + rhs;
    }
}

impl Sub for LogLinear {
    type Output = LogLinear;
    fn sub(self, rhs: LogLinear) -> LogLinear {
        self + (-rhs)
    }
}

impl Neg for LogLinear {
    type Output = LogLinear;
    fn neg(self) -> LogLinear {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for &LogLinear {
    type Output = LogLinear;
    fn mul(self, rhs: &Rational) -> LogLinear {
        self.scale(rhs)
    }
}

impl From<Rational> for LogLinear {
    fn from(r: Rational) -> Self {
        LogLinear::from_rational(r)
    }
}

impl fmt::Display for LogLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.rational.is_zero() || self.logs.is_empty() {
            parts.push(format_rational(&self.rational));
        }
        for (p, c) in &self.logs {
            if c.is_one() {
                parts.push(format!("log({p})"));
            } else if (-c).is_one() {
                parts.push(format!("-log({p})"));
            } else {
                parts.push(format!("{}*log({p})", format_rational(c)));
            }
        }
        let mut s = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                s.push_str(p);
            } else if let Some(stripped) = p.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(stripped);
            } else {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
        f.write_str(&s)
    }
}

/// Parses log-linear strings of the shape produced by `Display`, e.g.
/// "1/2 + 3*log(2) - log(5)" or plain "p/q".
pub fn parse_loglinear(s: &str) -> Result<LogLinear, Error> {
    let s = s.trim();
    let mut out = LogLinear::zero();
    // split into signed terms
    let mut terms: Vec<(i32, String)> = Vec::new();
    let mut cur = String::new();
    let mut sign = 1i32;
    let mut first = true;
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '+' | '-' if !first || !cur.trim().is_empty() => {
                if !cur.trim().is_empty() {
                    terms.push((sign, cur.trim().to_string()));
                }
                cur = String::new();
                sign = if c == '-' { -1 } else { 1 };
            }
            '-' => {
                sign = -sign;
            }
            _ => cur.push(c),
        }
        first = false;
    }
    if !cur.trim().is_empty() {
        terms.push((sign, cur.trim().to_string()));
    }
    if terms.is_empty() {
        return Err(Error::Parse(format!("empty log-linear literal {s:?}")));
    }
    for (sg, term) in terms {
        let sg = rat_int(sg as i64);
        if let Some(idx) = term.find("log(") {
            let close = term
                .rfind(')')
                .ok_or_else(|| Error::Parse(format!("unclosed log in {term:?}")))?;
            let p: u64 = term[idx + 4..close]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad prime in {term:?}")))?;
            let coeff_str = term[..idx].trim().trim_end_matches('*').trim();
            let coeff = if coeff_str.is_empty() {
                Rational::one()
            } else {
                parse_rational(coeff_str)?
            };
            out = out + LogLinear::log_prime(p, coeff * sg);
        } else {
            out = out + LogLinear::from_rational(parse_rational(&term)? * sg);
        }
    }
    Ok(out)
}

/// Rational bounds on ln(p) tight to roughly 2^-bits.
fn log_bounds(p: u64, bits: u32) -> (Rational, Rational) {
    // argument reduction: p = 2^k * r with r in [3/4, 3/2), ln p = k ln2 + ln r
    let mut k = 0u32;
    let mut r = Rational::from_integer(BigInt::from(p));
    let three_halves = rat(3, 2);
    while r >= three_halves {
        r /= rat_int(2);
        k += 1;
    }
    let (l2lo, l2hi) = atanh_bounds(&rat(1, 3), bits); // ln 2 = 2 atanh(1/3)
    let x = (&r - Rational::one()) / (&r + Rational::one());
    let (rlo, rhi) = atanh_bounds(&x, bits);
    let kq = rat_int(k as i64);
    (
        &kq * &l2lo * rat_int(2) + rlo * rat_int(2),
        &kq * &l2hi * rat_int(2) + rhi * rat_int(2),
    )
}

/// Bounds on atanh(x) for |x| < 1/2 via the odd power series with tail bound.
fn atanh_bounds(x: &Rational, bits: u32) -> (Rational, Rational) {
    let x2 = x * x;
    let tol = Rational::new(BigInt::one(), BigInt::one() << bits as usize);
    let mut term = x.clone(); // x^(2j+1)
    let mut sum = Rational::zero();
    let mut j = 0u32;
    loop {
        sum += &term / rat_int((2 * j + 1) as i64);
        term *= &x2;
        j += 1;
        // tail <= |x|^(2j+1) / ((2j+1)(1-x^2))
        let tail = term.abs() / (rat_int((2 * j + 1) as i64) * (Rational::one() - &x2));
        if tail < tol {
            if x.is_negative() {
                return (&sum - &tail, sum);
            }
            return (sum.clone(), sum + tail);
        }
    }
}
