//! Linked-tube map blueprints: pack degree-1 bumps into two complementary
//! coordinate boxes and read off the resulting linking-type invariant as the
//! product of the two packing degrees. Explicit fiber chains on a companion
//! grid let the oracle cross-check the count.

use num_traits::{One, Signed};
use serde::Serialize;

use crate::bounds::{ellipse_bound, format_rat, EllipseInvariant, Rat};
use crate::chain::{Chain, DoubleGeometry, RectGeometry};
use crate::generators::{linked_pair, LinkedPair};
use crate::oracle::intersection_number;
use crate::{Error, Result};

/// Number of disjoint degree-1 bumps of diameter C0/L packable in a box
/// with the given side lengths: the product of floor(side * L / C0).
pub fn degree_pack(side_lengths: &[Rat], l: Rat, c0: Rat) -> Result<u64> {
    if !l.is_positive() || !c0.is_positive() {
        return Err(Error::InvalidInput("L and C0 must be positive".into()));
    }
    let mut count = 1u64;
    for side in side_lengths {
        if !side.is_positive() {
            return Err(Error::InvalidInput("side lengths must be positive".into()));
        }
        let per_side = (*side * l / c0).floor().to_integer().max(0) as u64;
        count = count.saturating_mul(per_side);
    }
    Ok(count)
}

#[derive(Clone, Debug)]
pub struct MapBlueprint {
    /// principal axes E_0 <= ... <= E_n
    pub axes: Vec<Rat>,
    pub k1: usize,
    pub k2: usize,
    pub lip: Rat,
    pub c0: Rat,
    /// bumps packed in the box (E_{k2}, ..., E_n)
    pub d1: u64,
    /// bumps packed in the box (E_1, ..., E_{k2})
    pub d2: u64,
    /// achieved invariant d1 * d2
    pub invariant: u64,
    /// achieved / upper-bound ratio, for sharpness sweeps
    pub bound_ratio: Rat,
    /// companion grid hosting explicit fiber chains
    pub grid: DoubleGeometry,
}

#[derive(Serialize)]
struct BlueprintDto {
    axes: Vec<String>,
    k1: usize,
    k2: usize,
    lip: String,
    c0: String,
    d1: u64,
    d2: u64,
    invariant: u64,
    bound_ratio: String,
    grid_axes: Vec<u32>,
}

impl MapBlueprint {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(BlueprintDto {
            axes: self.axes.iter().map(format_rat).collect(),
            k1: self.k1,
            k2: self.k2,
            lip: format_rat(&self.lip),
            c0: format_rat(&self.c0),
            d1: self.d1,
            d2: self.d2,
            invariant: self.invariant,
            bound_ratio: format_rat(&self.bound_ratio),
            grid_axes: self.grid.rect().axes().to_vec(),
        })
        .expect("blueprint serialization")
    }
}

fn grid_axis(e: Rat) -> u32 {
    let rounded = (e + Rat::new(1, 2)).floor().to_integer().max(1) as u32;
    rounded.max(4)
}

/// Blueprint of the extremal L-Lipschitz map for invariant type (k1, k2) on
/// the ellipse with axes E_0..E_n: degrees from packing the two complementary
/// boxes, invariant d1 * d2, checked against the upper-bound evaluator.
pub fn build_linked_map(axes: &[Rat], k1: usize, l: Rat, c0: Rat) -> Result<MapBlueprint> {
    if axes.len() < 4 {
        return Err(Error::InvalidInput("need axes E_0..E_n with n >= 3".into()));
    }
    if axes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("axes must be sorted ascending".into()));
    }
    let n = axes.len() - 1;
    if k1 < 2 || 2 * k1 > n + 1 {
        return Err(Error::InvalidInput(format!(
            "k1 = {k1} must satisfy 2 <= k1 <= (n+1)/2"
        )));
    }
    let k2 = n + 1 - k1;
    if !l.is_positive() || !c0.is_positive() {
        return Err(Error::InvalidInput("L and C0 must be positive".into()));
    }
    if l * axes[1] <= c0 {
        return Err(Error::InvalidInput(format!(
            "inadmissible: L = {} must exceed C0/E_1 = {}",
            format_rat(&l),
            format_rat(&(c0 / axes[1]))
        )));
    }
    let d1 = degree_pack(&axes[k2..=n], l, c0)?;
    let d2 = degree_pack(&axes[1..=k2], l, c0)?;
    let invariant = d1 * d2;
    let upper = ellipse_bound(axes, EllipseInvariant::Linking { k1, k2 }, l)?.value;
    let achieved = Rat::from_integer(invariant as i64);
    if c0 >= Rat::one() {
        assert!(
            achieved <= upper,
            "achieved invariant {invariant} exceeds the upper bound {}",
            format_rat(&upper)
        );
    }
    let grid_axes: Vec<u32> = axes[1..].iter().map(|&e| grid_axis(e)).collect();
    let grid = DoubleGeometry::new(RectGeometry::new(grid_axes)?);
    Ok(MapBlueprint {
        axes: axes.to_vec(),
        k1,
        k2,
        lip: l,
        c0,
        d1,
        d2,
        invariant,
        bound_ratio: achieved / upper,
        grid,
    })
}

/// Parallel fiber copies of the two tube cores on the blueprint grid,
/// together with their filling witnesses. Every cross pair links exactly
/// once with the normalized sign; same-family copies have disjoint closed
/// supports from each other's witnesses, so they link zero.
#[derive(Clone, Debug)]
pub struct FiberSet {
    pub u_copies: Vec<Chain>,
    pub v_copies: Vec<Chain>,
    pub u_fillings: Vec<Chain>,
    pub v_solids: Vec<Chain>,
    /// cross_links[t][s] = linking of U copy t with V copy s
    pub cross_links: Vec<Vec<i64>>,
}

impl FiberSet {
    pub fn total_cross_linking(&self) -> i64 {
        self.cross_links.iter().flatten().sum()
    }
}

/// Build `copies` translates of each core: U copies step along axis n
/// (unspanned by U), V copies along axis 1 (unspanned by V). Checks room
/// first, then verifies every cross pair against the intersection oracle.
pub fn blueprint_fibers(b: &MapBlueprint, copies: usize) -> Result<FiberSet> {
    if copies == 0 {
        return Ok(FiberSet {
            u_copies: vec![],
            v_copies: vec![],
            u_fillings: vec![],
            v_solids: vec![],
            cross_links: vec![],
        });
    }
    let rect = b.grid.rect();
    let n = rect.n();
    let base: LinkedPair = linked_pair(&b.grid, b.k1, b.k2)?;

    // U translates along axis n must keep the core interior
    // (c_n + t <= R_n - 1) and keep the crossing coordinate inside the
    // quarter box of the V solid (c_n + t - 1 <= q_hi)
    let c_n = (rect.axis_len(n) / 2) as i32;
    let q_hi_n = (3 * rect.axis_len(n) / 4) as i32 - 1;
    let u_room = (q_hi_n + 2 - c_n).min(rect.axis_len(n) as i32 - c_n).max(0) as usize;
    // V translates along axis 1 must keep the offset box interior
    // (c_1 + s + 1/2 < R_1); axis 1 is swept fully by the U filling, so any
    // interior position crosses it
    let c_1 = (rect.axis_len(1) / 2) as i32;
    let v_room = (rect.axis_len(1) as i32 - c_1).max(0) as usize;
    if copies > u_room || copies > v_room {
        return Err(Error::InvalidInput(format!(
            "insufficient room on grid {:?} for {copies} copies (axis-{n} room {u_room}, axis-1 room {v_room})",
            rect.axes()
        )));
    }

    let mut u_copies = Vec::with_capacity(copies);
    let mut u_fillings = Vec::with_capacity(copies);
    let mut v_copies = Vec::with_capacity(copies);
    let mut v_solids = Vec::with_capacity(copies);
    for t in 0..copies {
        u_copies.push(base.core_u.translated(n, t as i32)?);
        u_fillings.push(base.u_filling.translated(n, t as i32)?);
        v_copies.push(base.core_v.translated(1, t as i32)?);
        v_solids.push(base.v_solid.translated(1, t as i32)?);
    }

    let mut cross_links = vec![vec![0i64; copies]; copies];
    for (t, uf) in u_fillings.iter().enumerate() {
        for (s, vc) in v_copies.iter().enumerate() {
            let link = intersection_number(uf, vc)?;
            assert_eq!(link, 1, "cross pair ({t},{s}) links {link}, expected 1");
            cross_links[t][s] = link;
        }
    }
    // same-family copies: each witness filling avoids the other copies'
    // closed supports entirely, so their pairings vanish identically
    for t in 0..copies {
        for s in 0..copies {
            if s != t {
                assert!(
                    u_fillings[t].disjoint_closed(&u_copies[s]),
                    "parallel U copies {t},{s} are not separated"
                );
                assert!(
                    v_solids[t].disjoint_closed(&v_copies[s]),
                    "parallel V copies {t},{s} are not separated"
                );
            }
        }
    }
    Ok(FiberSet { u_copies, v_copies, u_fillings, v_solids, cross_links })
}
