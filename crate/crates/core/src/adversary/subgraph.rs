//! Pruning a weighted graph down to a subset where every vertex keeps a
//! proportional share of its weight.

use num::Num;

use crate::error::{Error, Result};

fn two<T: Num>() -> T {
    T::one() + T::one()
}

fn check<T: Num + Clone + PartialOrd>(p: &[T], w: &[Vec<T>], r: &T) -> Result<()> {
    let m = p.len();
    if m == 0 {
        return Err(Error::Precondition("empty weight vector".into()));
    }
    if w.len() != m || w.iter().any(|row| row.len() != m) {
        return Err(Error::Precondition(format!("matrix must be {m}x{m}")));
    }
    if p.iter().any(|x| *x <= T::zero()) {
        return Err(Error::Precondition("vertex weights must be positive".into()));
    }
    if p.iter().fold(T::zero(), |a, x| a + x.clone()) != T::one() {
        return Err(Error::Precondition("vertex weights must sum to 1".into()));
    }
    let mut total = T::zero();
    for i in 0..m {
        for j in 0..m {
            if w[i][j] < T::zero() {
                return Err(Error::Precondition(format!("negative edge weight at ({i}, {j})")));
            }
            if w[i][j] != w[j][i] {
                return Err(Error::Precondition(format!("matrix not symmetric at ({i}, {j})")));
            }
            total = total + w[i][j].clone();
        }
    }
    if total < *r {
        return Err(Error::Precondition("total edge weight is below r".into()));
    }
    Ok(())
}

/// Repeatedly drops the lowest-indexed `i` with `sum_{j in U} w(i, j) < r p(i) / 2`.
/// Returns the surviving indices in ascending order.
pub fn subgraph_prune<T: Num + Clone + PartialOrd>(p: &[T], w: &[Vec<T>], r: &T) -> Result<Vec<usize>> {
    check(p, w, r)?;
    let m = p.len();
    let need: Vec<T> = p.iter().map(|pi| r.clone() * pi.clone() / two()).collect();
    let mut alive = vec![true; m];
    let mut row: Vec<T> = w.iter().map(|r| r.iter().fold(T::zero(), |a, x| a + x.clone())).collect();
    while let Some(i) = (0..m).find(|&i| alive[i] && row[i] < need[i]) {
        alive[i] = false;
        for k in 0..m {
            if alive[k] {
                row[k] = row[k].clone() - w[k][i].clone();
            }
        }
    }
    let u: Vec<usize> = (0..m).filter(|&i| alive[i]).collect();
    if u.is_empty() {
        return Err(Error::Precondition("pruning removed every index".into()));
    }
    Ok(u)
}

/// Whether `u` is nonempty and every member keeps `r p(i) / 2` of its weight inside `u`.
pub fn subgraph_holds<T: Num + Clone + PartialOrd>(p: &[T], w: &[Vec<T>], r: &T, u: &[usize]) -> bool {
    !u.is_empty()
        && u.iter().all(|&i| {
            let inside = u.iter().fold(T::zero(), |a, &j| a + w[i][j].clone());
            inside >= r.clone() * p[i].clone() / two()
        })
}
