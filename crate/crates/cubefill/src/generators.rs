//! Canonical test cycles: doubled coordinate boxes (equators), seeded random
//! exact cycles, and the linked core pairs used by the tube constructions.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{Chain, DirectionSet, DoubleGeometry, GridCell, Hemisphere, Lattice, Space};
use crate::oracle::intersection_number;
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EquatorKind {
    Smallest,
    Largest,
}

/// Full primal box over the given span axes, every other coordinate fixed at
/// its grid center, as a chain on the rectangle underlying `g`.
fn center_box(g: &DoubleGeometry, span: DirectionSet) -> Result<Chain> {
    let rect = g.rect();
    let n = rect.n();
    let mut cells = vec![(
        GridCell::new(
            Hemisphere::N,
            (1..=n)
                .map(|axis| {
                    if span.contains(axis) {
                        0
                    } else {
                        2 * (rect.axis_len(axis) / 2) as i32
                    }
                })
                .collect(),
            span,
        ),
        1i64,
    )];
    // expand each spanned axis over its full range
    for axis in span.axes() {
        let r = rect.axis_len(axis) as i32;
        cells = cells
            .iter()
            .flat_map(|(cell, coef)| {
                (0..r).map(move |j| {
                    let mut c = cell.clone();
                    c.base2[axis - 1] = 2 * j;
                    (c, *coef)
                })
            })
            .collect();
    }
    Chain::from_cells(Space::Rect(rect.clone()), span.len(), Lattice::Primal, cells)
}

/// The doubled coordinate box: Northern copy minus Southern copy of the
/// center box over `span`. A cycle of mass twice the spanned axis product,
/// provided no center coordinate lands on the wall.
pub fn doubled_box(g: &DoubleGeometry, span: DirectionSet) -> Result<Chain> {
    let rect = g.rect();
    for axis in 1..=rect.n() {
        if !span.contains(axis) && rect.axis_len(axis) < 2 {
            return Err(Error::InvalidInput(format!(
                "axis {axis} (length {}) has no interior center; need length >= 2",
                rect.axis_len(axis)
            )));
        }
    }
    let half = center_box(g, span)?;
    half.embed_double(Hemisphere::N)?
        .try_sub(&half.embed_double(Hemisphere::S)?)
}

/// The k-dimensional equator cycle: the doubled box over the k smallest
/// (or k largest) axes, centered in the remaining coordinates.
pub fn equator(g: &DoubleGeometry, k: usize, which: EquatorKind) -> Result<Chain> {
    let n = g.rect().n();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!("equator dimension {k} not in 1..{n}")));
    }
    let axes: Vec<usize> = match which {
        EquatorKind::Smallest => (1..=k).collect(),
        EquatorKind::Largest => (n - k + 1..=n).collect(),
    };
    doubled_box(g, DirectionSet::from_axes(&axes)?)
}

/// Random chain with about `density` cells, coefficients in {-2,-1,1,2}.
/// Deterministic in the seed.
pub fn random_chain(space: &Space, dim: usize, lattice: Lattice, seed: u64, density: usize) -> Chain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rect = space.rect().clone();
    let n = rect.n();
    let mut out = Chain::zero(space.clone(), dim, lattice);
    if dim > n {
        return out;
    }
    for _ in 0..density {
        let span_axes: Vec<usize> = sample(&mut rng, n, dim).iter().map(|i| i + 1).collect();
        let span = DirectionSet::from_axes(&span_axes).expect("sampled axes distinct");
        let mut base2 = Vec::with_capacity(n);
        let mut valid = true;
        for axis in 1..=n {
            let r2 = 2 * rect.axis_len(axis) as i32;
            let (lo, hi) = match (lattice, span.contains(axis)) {
                (Lattice::Primal, true) => (0, r2 - 2),
                (Lattice::Primal, false) => (0, r2),
                (Lattice::Offset, true) => (1, r2 - 3),
                (Lattice::Offset, false) => (1, r2 - 1),
            };
            if lo > hi {
                valid = false;
                break;
            }
            let steps = (hi - lo) / 2;
            base2.push(lo + 2 * rng.gen_range(0..=steps));
        }
        if !valid {
            continue;
        }
        let hemi = if space.is_double() && rng.gen_bool(0.5) {
            Hemisphere::S
        } else {
            Hemisphere::N
        };
        let coef = *[-2i64, -1, 1, 2].get(rng.gen_range(0..4)).unwrap();
        out.add_term(GridCell::new(hemi, base2, span), coef);
    }
    if space.is_double() {
        out.canonicalize()
    } else {
        out
    }
}

/// Random exact k-cycle: the boundary of a random (k+1)-chain.
pub fn random_cycle(space: &Space, k: usize, seed: u64, density: usize) -> Chain {
    random_chain(space, k + 1, Lattice::Primal, seed, density).boundary()
}

/// Random relative k-cycle on a rectangle: the interior part of the boundary
/// of a random (k+1)-chain (the discarded part lies in the wall, so the
/// boundary of the result does too).
pub fn random_relative_cycle(space: &Space, k: usize, seed: u64, density: usize) -> Chain {
    let rect = space.rect().clone();
    let full = random_cycle(space, k, seed, density);
    let mut out = Chain::zero(space.clone(), k, full.lattice());
    for (cell, coef) in full.iter() {
        if !cell.on_wall(&rect) {
            out.add_term(cell.clone(), coef);
        }
    }
    out
}

/// A canonically linked pair of cycles on the double, with explicit
/// witnesses: `core_u` is a primal doubled box crossing the equator,
/// `core_v` the boundary of an interior offset box threading the canonical
/// half-disc filling of `core_u` exactly once.
#[derive(Clone, Debug)]
pub struct LinkedPair {
    /// primal (k2-1)-cycle
    pub core_u: Chain,
    /// offset (k1-1)-cycle, Northern interior
    pub core_v: Chain,
    /// primal k2-chain with boundary(u_filling) = core_u
    pub u_filling: Chain,
    /// offset k1-chain with boundary(v_solid) = core_v
    pub v_solid: Chain,
}

/// Quarter-to-three-quarter base range of an axis, used to place the offset
/// box strictly interior while straddling the grid center.
fn quarter_range(r: u32) -> (i32, i32) {
    ((r / 4) as i32, (3 * r / 4) as i32 - 1)
}

/// Build the linked pair for invariant splitting (k1, k2) with
/// k1 + k2 = n + 1 and 2 <= k1 <= k2. Requires every axis length >= 4.
/// Normalized so that the pairing of `u_filling` with `core_v` is +1,
/// which pins the global sign convention of all linking numbers.
pub fn linked_pair(g: &DoubleGeometry, k1: usize, k2: usize) -> Result<LinkedPair> {
    let rect = g.rect();
    let n = rect.n();
    if k1 + k2 != n + 1 || k1 < 2 || k1 > k2 {
        return Err(Error::InvalidInput(format!(
            "need k1 + k2 = n + 1 and 2 <= k1 <= k2; got k1 = {k1}, k2 = {k2}, n = {n}"
        )));
    }
    if let Some(axis) = (1..=n).find(|&a| rect.axis_len(a) < 4) {
        return Err(Error::InvalidInput(format!(
            "axis {axis} has length {}; every axis must be at least 4 to host the interior offset box",
            rect.axis_len(axis)
        )));
    }

    let u_span = DirectionSet::from_axes(&(1..k2).collect::<Vec<_>>())?;
    let core_u = doubled_box(g, u_span)?;

    // half-disc: box over axes 1..=k2 with the k2 coordinate running from the
    // wall to the center, the rest centered
    let c_k2 = (rect.axis_len(k2) / 2) as i32;
    let p_span = u_span.with(k2);
    let mut half_cells = vec![(
        GridCell::new(
            Hemisphere::N,
            (1..=n)
                .map(|axis| {
                    if p_span.contains(axis) {
                        0
                    } else {
                        2 * (rect.axis_len(axis) / 2) as i32
                    }
                })
                .collect(),
            p_span,
        ),
        1i64,
    )];
    for axis in p_span.axes() {
        let top = if axis == k2 { c_k2 } else { rect.axis_len(axis) as i32 };
        half_cells = half_cells
            .iter()
            .flat_map(|(cell, coef)| {
                (0..top).map(move |j| {
                    let mut c = cell.clone();
                    c.base2[axis - 1] = 2 * j;
                    (c, *coef)
                })
            })
            .collect();
    }
    let half = Chain::from_cells(Space::Rect(rect.clone()), k2, Lattice::Primal, half_cells)?;
    let orient = if (k2 - 1) % 2 == 0 { 1 } else { -1 };
    let u_filling = half
        .embed_double(Hemisphere::N)?
        .try_sub(&half.embed_double(Hemisphere::S)?)?
        .scaled(orient);
    assert_eq!(u_filling.boundary(), core_u, "half-disc does not fill the core");

    // offset solid box spanning axes k2..=n at quarter positions, Northern
    let v_span = DirectionSet::from_axes(&(k2..=n).collect::<Vec<_>>())?;
    let mut v_cells = vec![(
        GridCell::new(
            Hemisphere::N,
            (1..=n)
                .map(|axis| {
                    if v_span.contains(axis) {
                        0
                    } else {
                        2 * (rect.axis_len(axis) / 2) as i32 + 1
                    }
                })
                .collect(),
            v_span,
        ),
        1i64,
    )];
    for axis in v_span.axes() {
        let (lo, hi) = quarter_range(rect.axis_len(axis));
        v_cells = v_cells
            .iter()
            .flat_map(|(cell, coef)| {
                (lo..=hi).map(move |j| {
                    let mut c = cell.clone();
                    c.base2[axis - 1] = 2 * j + 1;
                    (c, *coef)
                })
            })
            .collect();
    }
    let mut v_solid =
        Chain::from_cells(Space::Double(g.clone()), k1, Lattice::Offset, v_cells)?;
    let mut core_v = v_solid.boundary();

    let s = intersection_number(&u_filling, &core_v)?;
    assert_eq!(s.abs(), 1, "half-disc should thread the offset core exactly once, got {s}");
    if s < 0 {
        v_solid = v_solid.scaled(-1);
        core_v = core_v.scaled(-1);
    }
    Ok(LinkedPair { core_u, core_v, u_filling, v_solid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::RectGeometry;

    fn double(axes: &[u32]) -> DoubleGeometry {
        DoubleGeometry::new(RectGeometry::new(axes.to_vec()).unwrap())
    }

    #[test]
    fn equator_masses_and_cycles() {
        let g = double(&[2, 4, 4]);
        let small = equator(&g, 1, EquatorKind::Smallest).unwrap();
        assert_eq!(small.mass(), 4); // 2 * R_1
        assert!(small.boundary().is_zero());
        let large = equator(&g, 1, EquatorKind::Largest).unwrap();
        assert_eq!(large.mass(), 8); // 2 * R_3
        assert!(large.boundary().is_zero());
        let small2 = equator(&g, 2, EquatorKind::Smallest).unwrap();
        assert_eq!(small2.mass(), 16); // 2 * R_1 * R_2
        assert!(small2.boundary().is_zero());
    }

    #[test]
    fn random_cycles_are_cycles_and_deterministic() {
        let g = Space::Double(double(&[2, 3, 4]));
        for seed in 0..20 {
            let z = random_cycle(&g, 1, seed, 12);
            assert!(z.boundary().is_zero());
        }
        let a = random_cycle(&g, 2, 7, 15);
        let b = random_cycle(&g, 2, 7, 15);
        assert_eq!(a, b);
        assert!(random_cycle(&g, 1, 3, 0).is_zero());
    }

    #[test]
    fn random_relative_cycles_bound_into_the_wall() {
        let g = Space::Rect(RectGeometry::new(vec![2, 3, 4]).unwrap());
        for seed in 0..20 {
            let z = random_relative_cycle(&g, 1, seed, 12);
            let rect = g.rect();
            assert!(z.boundary().iter().all(|(c, _)| c.on_wall(rect)));
        }
    }

    #[test]
    fn linked_pair_hopf_case() {
        let g = double(&[4, 4, 4]);
        let pair = linked_pair(&g, 2, 2).unwrap();
        assert!(pair.core_u.boundary().is_zero());
        assert!(pair.core_v.boundary().is_zero());
        assert_eq!(pair.u_filling.boundary(), pair.core_u);
        assert_eq!(pair.v_solid.boundary(), pair.core_v);
        assert_eq!(intersection_number(&pair.u_filling, &pair.core_v).unwrap(), 1);
        assert!(pair.core_u.disjoint_closed(&pair.core_v));
    }

    #[test]
    fn linked_pair_asymmetric_case() {
        let g = double(&[4, 4, 4, 4]);
        let pair = linked_pair(&g, 2, 3).unwrap();
        assert_eq!(pair.core_u.dim(), 2);
        assert_eq!(pair.core_v.dim(), 1);
        assert_eq!(intersection_number(&pair.u_filling, &pair.core_v).unwrap(), 1);
        assert!(pair.core_u.disjoint_closed(&pair.core_v));
    }

    #[test]
    fn linked_pair_rejects_small_axes() {
        let g = double(&[3, 4, 4]);
        assert!(linked_pair(&g, 2, 2).is_err());
    }
}
