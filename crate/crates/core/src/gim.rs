//! Generalized intersection matrices: construction from an ordering,
//! admissibility on triangles, and mutation alongside `[B | C]`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fork::LinearOrdering;
use crate::matrix::IntMatrix;
use crate::quiver::{ExchangeMatrix, FramedSeed, MutationSequence};

/// Integer matrix with diagonal 2 and sign-symmetric off-diagonal pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gim {
    pub a: IntMatrix,
    pub origin_ordering: Option<LinearOrdering>,
}

impl Gim {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.a[(i, j)]
    }

    /// Diagonal 2 and `sgn(a_ij) = sgn(a_ji)` everywhere.
    pub fn is_well_formed(&self) -> bool {
        let n = self.n();
        let two = BigInt::from(2);
        self.a.is_square()
            && (0..n).all(|i| self.a[(i, i)] == two)
            && (0..n).all(|i| (0..n).all(|j| self.a[(i, j)].sign() == self.a[(j, i)].sign()))
    }
}

/// `a_ij = b_ij` if `i` precedes `j`, `-b_ij` if `j` precedes `i`, 2 on the diagonal.
pub fn gim_from_ordering(b: &ExchangeMatrix, ord: &LinearOrdering) -> Result<Gim> {
    let n = b.n();
    if ord.n() != n {
        return Err(Error::BadOrdering { n });
    }
    let rank = ord.ranks();
    let mut a = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = if i == j {
                BigInt::from(2)
            } else if rank[i] < rank[j] {
                b.get(i, j).clone()
            } else {
                -b.get(i, j)
            };
        }
    }
    Ok(Gim {
        a,
        origin_ordering: Some(ord.clone()),
    })
}

/// First reason `g` fails to be admissible for `b`, checking magnitudes and
/// every triangle. Errors if `b` is not complete.
pub fn admissibility_violation(g: &Gim, b: &ExchangeMatrix) -> Result<Option<String>> {
    let n = b.n();
    if let Some((i, j)) = b.missing_edge() {
        return Err(Error::Incomplete { i: i + 1, j: j + 1 });
    }
    if g.n() != n {
        return Err(Error::Shape {
            rows: g.a.rows(),
            cols: g.a.cols(),
        });
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && g.a[(i, j)].abs() != b.get(i, j).abs() {
                return Ok(Some(format!(
                    "|a[{}][{}]| = {} differs from |b| = {}",
                    i + 1,
                    j + 1,
                    g.a[(i, j)].abs(),
                    b.get(i, j).abs()
                )));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let p = -(g.get(i, j) * g.get(j, k) * g.get(k, i));
                let oriented = {
                    let s = b.get(i, j).sign();
                    s == b.get(j, k).sign() && s == b.get(k, i).sign()
                };
                let ok = if oriented { p.is_negative() } else { p.is_positive() };
                if !ok {
                    return Ok(Some(format!(
                        "triangle ({},{},{}) is {} but its product is {}",
                        i + 1,
                        j + 1,
                        k + 1,
                        if oriented { "oriented" } else { "not oriented" },
                        p
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Admissibility on triangles; requires a complete quiver.
pub fn is_admissible(g: &Gim, b: &ExchangeMatrix) -> Result<bool> {
    Ok(admissibility_violation(g, b)?.is_none())
}

/// Mutation of `g` at `k`, where `seed` holds `[B^w | C^w]` before the step.
pub fn mutate_gim(g: &Gim, seed: &FramedSeed, k: usize) -> Result<Gim> {
    let b = &seed.b;
    b.check_index(k)?;
    let n = b.n();
    let ck = seed.c_sign(k)?;
    for i in (0..n).filter(|&i| i != k) {
        if b.get(i, k).is_zero() {
            return Err(Error::Incomplete { i: i + 1, j: k + 1 });
        }
    }
    let a = &g.a;
    let mut out = a.clone();
    for i in 0..n {
        if i == k {
            continue;
        }
        // -sgn(b_ik c_k) a_ik, and symmetrically for the row of k.
        let flip = b.get(i, k).is_positive() == (ck > 0);
        let v = if flip { -&a[(i, k)] } else { a[(i, k)].clone() };
        out[(k, i)] = v.clone();
        out[(i, k)] = v;
        for j in 0..n {
            if j == k || j == i {
                continue;
            }
            if (b.get(i, k) * b.get(k, j)).is_positive() {
                out[(i, j)] = &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
            }
        }
    }
    Ok(Gim {
        a: out,
        origin_ordering: g.origin_ordering.clone(),
    })
}

/// Co-evolves `[B | C]` and the GIM of `ord` along `w`.
pub fn apply_gim_sequence(
    b0: &ExchangeMatrix,
    ord: &LinearOrdering,
    w: &MutationSequence,
) -> Result<(Gim, FramedSeed)> {
    let mut g = gim_from_ordering(b0, ord)?;
    let mut seed = FramedSeed::new(b0.clone());
    for &k in w.indices() {
        g = mutate_gim(&g, &seed, k)?;
        seed = seed.mutate(k)?;
    }
    Ok((g, seed))
}
