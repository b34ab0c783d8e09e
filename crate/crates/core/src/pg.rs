//! The Desarguesian projective planes PG(2, q).

use crate::field::{FieldError, FiniteField};
use crate::space::LinearSpace;

/// Normalized homogeneous coordinates of the points of PG(2, q): the
/// rightmost nonzero coordinate is 1. Sorted lexicographically; the index
/// in this list is the point identifier.
pub fn normalized_points(field: &FiniteField) -> Vec<[usize; 3]> {
    let q = field.order();
    let mut pts = Vec::with_capacity(q * q + q + 1);
    for x0 in 0..q {
        for x1 in 0..q {
            for x2 in 0..q {
                let v = [x0, x1, x2];
                if v.iter().rev().find(|&&c| c != 0) == Some(&1) {
                    pts.push(v);
                }
            }
        }
    }
    pts.sort_unstable();
    pts
}

/// PG(2, q) for a supported prime power `q <= 16`.
///
/// Lines are the zero sets of normalized dual vectors. Point identifiers
/// follow [`normalized_points`].
pub fn projective_plane(q: usize) -> Result<LinearSpace, FieldError> {
    let field = FiniteField::new(q)?;
    Ok(plane_over(&field))
}

pub fn plane_over(field: &FiniteField) -> LinearSpace {
    let pts = normalized_points(field);
    let dot = |a: &[usize; 3], b: &[usize; 3]| {
        let s = field.add(field.mul(a[0], b[0]), field.mul(a[1], b[1]));
        field.add(s, field.mul(a[2], b[2]))
    };
    let lines: Vec<Vec<usize>> = pts
        .iter()
        .map(|u| {
            pts.iter()
                .enumerate()
                .filter(|(_, v)| dot(u, v) == 0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    LinearSpace::new(pts.len(), &lines).expect("PG(2,q) satisfies the linear space axioms")
}
