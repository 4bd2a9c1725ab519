//! Symmetric block designs from Singer planar difference sets.

use super::{Allocation, AllocationKind};
use crate::error::{Error, Result};

fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|p| q.is_multiple_of(*p))?;
    let mut rest = q;
    let mut a = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        a += 1;
    }
    (rest == 1).then_some((p, a))
}

// Powers x^0, x^1, ... of the class of x modulo a primitive polynomial of
// degree `deg` over GF(p), as coefficient vectors. Returns None when the
// polynomial is not primitive.
fn power_table(p: usize, deg: usize, low_coeffs: &[usize]) -> Option<Vec<Vec<usize>>> {
    let order = p.pow(deg as u32) - 1;
    let one: Vec<usize> = (0..deg).map(|i| usize::from(i == 0)).collect();
    let mut table = Vec::with_capacity(order);
    let mut cur = one.clone();
    for step in 0..order {
        if step > 0 && cur == one {
            return None;
        }
        table.push(cur.clone());
        // Multiply by x, then fold x^deg = -(c_0 + c_1 x + ...).
        let top = cur[deg - 1];
        for i in (1..deg).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        for i in 0..deg {
            cur[i] = (cur[i] + (p - low_coeffs[i]) * top) % p;
        }
    }
    (cur == one).then_some(table)
}

fn primitive_power_table(p: usize, deg: usize) -> Vec<Vec<usize>> {
    let count = p.pow(deg as u32);
    for code in 0..count {
        let coeffs: Vec<usize> = (0..deg).map(|i| code / p.pow(i as u32) % p).collect();
        if coeffs[0] == 0 {
            continue;
        }
        if let Some(table) = power_table(p, deg, &coeffs) {
            return table;
        }
    }
    unreachable!("a primitive polynomial exists for every field size")
}

/// Singer difference set of size `q + 1` modulo `q^2 + q + 1`, sorted.
///
/// The exponents `i` with `Tr(g^i) = 0`, for `g` primitive in GF(q^3) and the
/// trace taken down to GF(q), are a planar difference set. Degenerate orders
/// `q = 0` and `q = 1` give `{0}` mod 1 and `{0, 1}` mod 3.
pub fn planar_difference_set(q: usize) -> Result<Vec<usize>> {
    match q {
        0 => return Ok(vec![0]),
        1 => return Ok(vec![0, 1]),
        _ => {}
    }
    let (p, a) = prime_power(q)
        .ok_or_else(|| Error::UnsupportedDesign(format!("order {q} is not a prime power")))?;
    let deg = 3 * a;
    let table = primitive_power_table(p, deg);
    let order = table.len();
    let v = q * q + q + 1;
    let mut set: Vec<usize> = (0..v)
        .filter(|&i| {
            let e1 = &table[i];
            let e2 = &table[i * q % order];
            let e3 = &table[i * q * q % order];
            (0..deg).all(|c| (e1[c] + e2[c] + e3[c]).is_multiple_of(p))
        })
        .collect();
    set.sort_unstable();
    debug_assert_eq!(set.len(), q + 1);
    Ok(set)
}

/// Symmetric `(d^2 - d + 1, d, 1)` design as a d-choice replica allocation.
///
/// Node `j` stores objects `j + D` for a planar difference set `D`; object
/// `i` is therefore served by nodes `i - δ`, listed in the order of `D`.
pub fn build_block_design(d: usize) -> Result<Allocation> {
    if d == 0 {
        return Err(Error::invalid("block design needs d >= 1"));
    }
    let q = d - 1;
    let diff = planar_difference_set(q)?;
    let v = q * q + q + 1;
    let sets = (0..v)
        .map(|i| diff.iter().map(|&delta| vec![(i + v - delta) % v]).collect())
        .collect();
    Ok(Allocation::custom(v, v, d, 1, sets)?.with_kind(AllocationKind::BlockDesign))
}
