use crate::error::Result;
use crate::function::SparseFunction;
use crate::rational::{self, int, Rational};
use crate::tree::{TreeWindow, VertexAddress};

/// `κ(x, y) = 1 / |T_η(x ∧ y)|`, where `η` is the larger of the two
/// distances from the confluent to `x` and `y`.
pub fn kernel_kappa(w: &TreeWindow, x: &VertexAddress, y: &VertexAddress) -> Result<Rational> {
    let (xi, yi) = (w.id_of(x)?, w.id_of(y)?);
    let (c, eta) = w.confluent_id(xi, yi);
    Ok(rational::ratio(1, w.volume(c, eta)))
}

/// `τ(x, y) = 1 / |T_d(x)|` when `y` lies below `x` at distance `d`, else 0.
pub fn kernel_tau(w: &TreeWindow, x: &VertexAddress, y: &VertexAddress) -> Result<Rational> {
    let (xi, yi) = (w.id_of(x)?, w.id_of(y)?);
    let (c, eta) = w.confluent_id(xi, yi);
    if c != xi {
        return Ok(rational::zero());
    }
    Ok(rational::ratio(1, w.volume(xi, eta)))
}

/// `𝒦f(x)` for a signed function with finite support in the window.
pub fn eval_k(w: &TreeWindow, f: &SparseFunction, x: &VertexAddress) -> Result<Rational> {
    let xi = w.id_of(x)?;
    let mut acc = rational::zero();
    for (y, fy) in f.resolve(w)? {
        let (c, eta) = w.confluent_id(xi, y);
        acc += fy / int(w.volume(c, eta));
    }
    Ok(acc)
}
