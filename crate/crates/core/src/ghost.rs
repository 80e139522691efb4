//! Ghost components over the integers.
//!
//! `w_i(z) = sum_{j <= i} p^j z_j^{p^(i-j)}`. Over a torsion-free ring the
//! ghost map is injective and turns Witt addition and multiplication into
//! componentwise operations, which makes it the independent oracle for the
//! structural polynomials.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, Zero};

use crate::error::{Error, Result};

pub fn ghost(p: u64, coords: &[BigInt]) -> Vec<BigInt> {
    (0..coords.len())
        .map(|i| {
            (0..=i).fold(BigInt::zero(), |acc, j| {
                acc + BigInt::from(p).pow(j as u32) * coords[j].clone().pow(p.pow((i - j) as u32))
            })
        })
        .collect()
}

/// Inverts the ghost map by solving the triangular system.
pub fn from_ghost(p: u64, g: &[BigInt]) -> Result<Vec<BigInt>> {
    let mut coords: Vec<BigInt> = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        let mut rest = g[i].clone();
        for (j, z) in coords.iter().enumerate() {
            rest -= BigInt::from(p).pow(j as u32) * z.clone().pow(p.pow((i - j) as u32));
        }
        let d = BigInt::from(p).pow(i as u32);
        let (q, r) = rest.div_rem(&d);
        if !r.is_zero() {
            return Err(Error::NotInGhostImage(i));
        }
        coords.push(q);
    }
    Ok(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(ghost(2, &ints(&[1, 1])), ints(&[1, 3]));
        assert_eq!(from_ghost(2, &ints(&[1, 3])).unwrap(), ints(&[1, 1]));
        assert_eq!(ghost(3, &ints(&[2, 0, 0])), ints(&[2, 8, 512]));
        assert!(matches!(from_ghost(2, &ints(&[1, 2])), Err(Error::NotInGhostImage(1))));
    }
}
