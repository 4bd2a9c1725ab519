use super::{Allocation, AllocationKind, StoredItem};
use crate::error::{Error, Result};

/// `m` objects per node, each stored once: object `o` lives on node `o / m`.
pub fn build_single_choice(n: usize, m: usize) -> Result<Allocation> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("single choice needs n >= 1 and m >= 1"));
    }
    let sets = (0..n * m).map(|o| vec![vec![o / m]]).collect();
    Ok(Allocation::custom(n, n * m, 1, 1, sets)?.with_kind(AllocationKind::SingleChoice))
}

/// Nodes split into clusters of `d`; each cluster holds its `d` objects on all members.
pub fn build_clustering(n: usize, d: usize) -> Result<Allocation> {
    if d == 0 || n == 0 || !n.is_multiple_of(d) {
        return Err(Error::invalid(format!("clustering needs d >= 1 dividing n, got n={n} d={d}")));
    }
    let sets = (0..n)
        .map(|o| {
            let base = o / d * d;
            (0..d).map(|j| vec![base + j]).collect()
        })
        .collect();
    Ok(Allocation::custom(n, n, d, 1, sets)?.with_kind(AllocationKind::Clustering))
}

/// Object `i` is replicated on nodes `i, i+1, ..., i+d-1` (mod `n`).
pub fn build_cyclic(n: usize, d: usize) -> Result<Allocation> {
    if d == 0 || d > n {
        return Err(Error::invalid(format!("cyclic needs 1 <= d <= n, got n={n} d={d}")));
    }
    let sets = (0..n)
        .map(|i| (0..d).map(|j| vec![(i + j) % n]).collect())
        .collect();
    Ok(Allocation::custom(n, n, d, 1, sets)?.with_kind(AllocationKind::Cyclic))
}

/// Cyclic layout with r-XOR recovery sets.
///
/// Object `i` keeps its exact copy on node `i`; its j-th recovery set is the
/// `r` consecutive nodes `i+(j-1)r+1 ..= i+jr`. The first `r-1` nodes of a
/// set contribute their own exact copies and the last one stores the XOR of
/// `i` with those copies, so every node holds one exact copy and `d-1` XORs.
pub fn build_cyclic_xor(n: usize, d: usize, r: usize) -> Result<Allocation> {
    if d == 0 || r < 2 {
        return Err(Error::invalid(format!("cyclic_xor needs d >= 1 and r >= 2, got d={d} r={r}")));
    }
    let span = 1 + r * (d - 1);
    if n < span {
        return Err(Error::invalid(format!(
            "cyclic_xor needs n >= 1 + r(d-1) = {span}, got n={n}"
        )));
    }
    let sets: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|i| {
            let mut choices = vec![vec![i]];
            for j in 1..d {
                choices.push((1..=r).map(|t| (i + (j - 1) * r + t) % n).collect());
            }
            choices
        })
        .collect();
    let contents = (0..n)
        .map(|v| {
            let mut items = vec![StoredItem::Exact(v)];
            for j in 1..d {
                let owner = (v + n * d * r - j * r) % n;
                let mut objs = vec![owner];
                objs.extend((1..r).map(|t| (owner + (j - 1) * r + t) % n));
                items.push(StoredItem::Xor(objs));
            }
            items
        })
        .collect();
    Allocation::custom(n, n, d, r, sets)?
        .with_kind(AllocationKind::CyclicXor)
        .with_contents(contents)
}
