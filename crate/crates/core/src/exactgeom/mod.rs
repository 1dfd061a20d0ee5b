//! Exact rational linear algebra, linear programming and polytope geometry.

pub mod linalg;
pub mod lp;
pub mod polytope;

pub use polytope::{Cone, Polytope};

use crate::scalar::Rational;

/// Point or direction with exact rational coordinates.
pub type Vector = Vec<Rational>;

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vadd(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vscale(a: &[Rational], s: &Rational) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn vneg(a: &[Rational]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn zeros(d: usize) -> Vector {
    vec![Rational::default(); d]
}

pub fn unit(d: usize, i: usize) -> Vector {
    let mut v = zeros(d);
    v[i] = Rational::from_integer(1.into());
    v
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    use num_traits::Zero;
    a.iter().all(|x| x.is_zero())
}
