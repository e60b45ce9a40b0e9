//! Independent verification machinery: L1-minimal fillings by linear
//! programming (with a branch-and-bound integral mode), transverse
//! intersection numbers between primal and offset chains, and linking
//! numbers computed by fill-and-intersect.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::chain::{Chain, DirectionSet, GridCell, Hemisphere, Lattice, Space};
use crate::filler::fill_double;
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveMode {
    Lp,
    Ilp,
}

/// Size cap for filling solves; `max_nonzeros` counts boundary-matrix
/// entries (columns times faces per column) before variable splitting.
#[derive(Clone, Copy, Debug)]
pub struct LpBudget {
    pub max_nonzeros: usize,
    pub max_nodes: usize,
}

impl Default for LpBudget {
    fn default() -> Self {
        LpBudget { max_nonzeros: 200_000, max_nodes: 20_000 }
    }
}

/// Result of a minimal-filling solve. In `Lp` mode the value is a certified
/// lower bound on the integral filling volume; in `Ilp` mode it is the exact
/// integral optimum and the witness has integer coefficients.
#[derive(Clone, Debug)]
pub struct MinFilling {
    pub value: f64,
    pub witness: Vec<(GridCell, f64)>,
    pub mode: SolveMode,
}

impl MinFilling {
    /// Witness as an integer chain; only meaningful in `Ilp` mode.
    pub fn integral_witness(&self, space: &Space, dim: usize, lattice: Lattice) -> Result<Chain> {
        let cells: Vec<(GridCell, i64)> = self
            .witness
            .iter()
            .map(|(c, v)| {
                let r = v.round();
                if (v - r).abs() > 1e-6 {
                    return Err(Error::InvalidInput(format!(
                        "witness coefficient {v} for {c:?} is not integral"
                    )));
                }
                Ok((c.clone(), r as i64))
            })
            .collect::<Result<_>>()?;
        Chain::from_cells(space.clone(), dim, lattice, cells)
    }
}

/// All valid cells of one dimension on a space, canonical on doubles
/// (wall-supported cells appear once, labelled N). Deterministic order.
pub fn enumerate_cells(space: &Space, dim: usize, lattice: Lattice) -> Vec<GridCell> {
    let rect = space.rect();
    let n = rect.n();
    let mut out = Vec::new();
    let mut span_axes = Vec::new();
    // iterate over all span subsets of size `dim` via bitmask
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != dim {
            continue;
        }
        let span = DirectionSet::from_mask(mask);
        span_axes.clear();
        span_axes.extend(span.axes());
        // doubled-coordinate ranges per axis
        let ranges: Vec<(i32, i32)> = (1..=n)
            .map(|axis| {
                let r2 = 2 * rect.axis_len(axis) as i32;
                match (lattice, span.contains(axis)) {
                    (Lattice::Primal, true) => (0, r2 - 2),
                    (Lattice::Primal, false) => (0, r2),
                    (Lattice::Offset, true) => (1, r2 - 3),
                    (Lattice::Offset, false) => (1, r2 - 1),
                }
            })
            .collect();
        if ranges.iter().any(|&(lo, hi)| lo > hi) {
            continue;
        }
        let mut base2: Vec<i32> = ranges.iter().map(|&(lo, _)| lo).collect();
        'cells: loop {
            let cell = GridCell::new(Hemisphere::N, base2.clone(), span);
            let wall = cell.on_wall(rect);
            if space.is_double() {
                out.push(cell.clone());
                if !wall {
                    let mut s = cell;
                    s.hemi = Hemisphere::S;
                    out.push(s);
                }
            } else {
                out.push(cell);
            }
            let mut i = 0;
            loop {
                if i == n {
                    break 'cells;
                }
                base2[i] += 2;
                if base2[i] <= ranges[i].1 {
                    break;
                }
                base2[i] = ranges[i].0;
                i += 1;
            }
        }
    }
    out
}

struct FillingInstance {
    columns: Vec<GridCell>,
    /// per column: (row index, boundary coefficient)
    col_faces: Vec<Vec<(usize, i64)>>,
    rhs: Vec<f64>,
    nonzeros: usize,
}

fn build_instance(z: &Chain, budget: &LpBudget) -> Result<FillingInstance> {
    let space = z.space().clone();
    let k = z.dim();
    let columns = enumerate_cells(&space, k + 1, z.lattice());
    let nonzeros = columns.len() * 2 * (k + 1);
    if nonzeros > budget.max_nonzeros {
        return Err(Error::OverBudget {
            size: nonzeros,
            unit: "boundary-matrix nonzeros",
            limit: budget.max_nonzeros,
        });
    }
    let mut row_index: BTreeMap<GridCell, usize> = BTreeMap::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (cell, coef) in z.iter() {
        row_index.insert(cell.clone(), rhs.len());
        rhs.push(coef as f64);
    }
    let mut col_faces = Vec::with_capacity(columns.len());
    for col in &columns {
        let single = Chain::from_cells(space.clone(), k + 1, z.lattice(), [(col.clone(), 1)])
            .expect("enumerated cell is valid");
        let faces: Vec<(usize, i64)> = single
            .boundary()
            .iter()
            .map(|(face, c)| {
                let idx = *row_index.entry(face.clone()).or_insert_with(|| {
                    rhs.push(0.0);
                    rhs.len() - 1
                });
                (idx, c)
            })
            .collect();
        col_faces.push(faces);
    }
    Ok(FillingInstance { columns, col_faces, rhs, nonzeros })
}

/// Extra per-column bound constraints accumulated while branching.
#[derive(Clone, Default)]
struct Branches(Vec<(usize, f64, bool)>); // (col, bound, is_upper)

fn solve_relaxation(inst: &FillingInstance, branches: &Branches) -> Option<(f64, Vec<f64>)> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<(Variable, Variable)> = (0..inst.columns.len())
        .map(|_| {
            (
                p.add_var(1.0, (0.0, f64::INFINITY)),
                p.add_var(1.0, (0.0, f64::INFINITY)),
            )
        })
        .collect();
    let mut rows: Vec<Vec<(Variable, f64)>> = vec![Vec::new(); inst.rhs.len()];
    for (ci, faces) in inst.col_faces.iter().enumerate() {
        for &(ri, c) in faces {
            rows[ri].push((vars[ci].0, c as f64));
            rows[ri].push((vars[ci].1, -c as f64));
        }
    }
    for (ri, row) in rows.iter().enumerate() {
        if row.is_empty() {
            if inst.rhs[ri] != 0.0 {
                return None;
            }
            continue;
        }
        p.add_constraint(row.as_slice(), ComparisonOp::Eq, inst.rhs[ri]);
    }
    for &(ci, bound, upper) in &branches.0 {
        let expr = [(vars[ci].0, 1.0), (vars[ci].1, -1.0)];
        let op = if upper { ComparisonOp::Le } else { ComparisonOp::Ge };
        p.add_constraint(&expr[..], op, bound);
    }
    let sol = p.solve().ok()?;
    let values: Vec<f64> = vars.iter().map(|&(vp, vm)| sol[vp] - sol[vm]).collect();
    Some((sol.objective(), values))
}

/// Minimal filling volume of a cycle: `min sum |y_c|` subject to
/// `boundary(y) = z`. `Lp` relaxes to real coefficients (a lower bound on
/// the integral optimum); `Ilp` branches to the exact integral optimum.
pub fn min_filling(z: &Chain, mode: SolveMode, budget: &LpBudget) -> Result<MinFilling> {
    if z.is_zero() {
        return Ok(MinFilling { value: 0.0, witness: vec![], mode });
    }
    let b = z.boundary();
    if !b.is_zero() {
        let example = b.iter().next().map(|(c, _)| format!("{c:?}")).unwrap_or_default();
        return Err(Error::NotACycle { count: b.len(), example });
    }
    let inst = build_instance(z, budget)?;

    let pack = |values: &[f64]| -> Vec<(GridCell, f64)> {
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > 1e-9)
            .map(|(i, &v)| (inst.columns[i].clone(), v))
            .collect()
    };

    let (obj, values) = solve_relaxation(&inst, &Branches::default()).ok_or(Error::Infeasible)?;
    let fractional =
        |vals: &[f64]| -> Option<usize> {
            let mut worst = None;
            let mut worst_gap = 1e-6;
            for (i, v) in vals.iter().enumerate() {
                let gap = (v - v.round()).abs();
                if gap > worst_gap {
                    worst_gap = gap;
                    worst = Some(i);
                }
            }
            worst
        };

    match mode {
        SolveMode::Lp => Ok(MinFilling { value: obj, witness: pack(&values), mode }),
        SolveMode::Ilp => {
            let mut best_value = f64::INFINITY;
            let mut best_witness: Option<Vec<f64>> = None;
            let mut stack = vec![(Branches::default(), obj, values)];
            let mut nodes = 0usize;
            while let Some((branches, obj, values)) = stack.pop() {
                nodes += 1;
                if nodes > budget.max_nodes {
                    return Err(Error::OverBudget {
                        size: nodes,
                        unit: "branch-and-bound nodes",
                        limit: budget.max_nodes,
                    });
                }
                // integral objective: round the relaxation bound up
                if (obj - 1e-6).ceil() >= best_value - 1e-9 {
                    continue;
                }
                match fractional(&values) {
                    None => {
                        let rounded: Vec<f64> = values.iter().map(|v| v.round()).collect();
                        let val: f64 = rounded.iter().map(|v| v.abs()).sum();
                        if val < best_value - 1e-9 {
                            best_value = val;
                            best_witness = Some(rounded);
                        }
                    }
                    Some(ci) => {
                        let v = values[ci];
                        for (bound, upper) in [(v.floor(), true), (v.ceil(), false)] {
                            let mut child = branches.clone();
                            child.0.push((ci, bound, upper));
                            if let Some((cobj, cvals)) = solve_relaxation(&inst, &child) {
                                if (cobj - 1e-6).ceil() < best_value - 1e-9 {
                                    stack.push((child, cobj, cvals));
                                }
                            }
                        }
                    }
                }
            }
            let witness = best_witness.ok_or(Error::Infeasible)?;
            Ok(MinFilling { value: best_value, witness: pack(&witness), mode })
        }
    }
}

/// Dump the LP instance: one line `row col coef` per boundary-matrix
/// nonzero, preceded by `# rhs row value` lines for the nonzero targets.
pub fn dump_instance(z: &Chain, budget: &LpBudget) -> Result<String> {
    let inst = build_instance(z, budget)?;
    let mut out = String::new();
    writeln!(out, "# columns {} rows {} nonzeros {}", inst.columns.len(), inst.rhs.len(), inst.nonzeros).unwrap();
    for (ri, v) in inst.rhs.iter().enumerate() {
        if *v != 0.0 {
            writeln!(out, "# rhs {ri} {v}").unwrap();
        }
    }
    for (ci, faces) in inst.col_faces.iter().enumerate() {
        for &(ri, c) in faces {
            writeln!(out, "{ri} {ci} {c:+}").unwrap();
        }
    }
    Ok(out)
}

fn hemi_factor(h: Hemisphere) -> i64 {
    match h {
        Hemisphere::N => 1,
        Hemisphere::S => -1,
    }
}

/// Shuffle sign of merging two disjoint ascending axis frames into 1..n:
/// parity of the number of pairs (i in a, j in b) with j < i.
fn merge_sign(a: DirectionSet, b: DirectionSet) -> i64 {
    let mut inversions = 0u32;
    for i in a.axes() {
        inversions += b.count_below(i);
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// For a primal cell, the unique offset cell of complementary span whose
/// closed support crosses it in one interior point.
fn transverse_partner(a: &GridCell, n: usize) -> GridCell {
    let span_b = a.span.complement(n);
    let base2: Vec<i32> = (1..=n)
        .map(|axis| {
            if a.span.contains(axis) {
                a.base2[axis - 1] + 1
            } else {
                a.base2[axis - 1] - 1
            }
        })
        .collect();
    GridCell::new(a.hemi, base2, span_b)
}

/// Signed transverse intersection count of a primal chain `a` and an offset
/// chain `b` of complementary dimensions. Each primal cell meets exactly one
/// potential offset partner; wall-supported primal cells meet none (their
/// partner would poke outside the rectangle). Bilinear in both arguments.
pub fn intersection_number(a: &Chain, b: &Chain) -> Result<i64> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch);
    }
    if a.lattice() != Lattice::Primal || b.lattice() != Lattice::Offset {
        return Err(Error::LatticeMismatch);
    }
    let n = a.space().n();
    if a.dim() + b.dim() != n {
        return Err(Error::InvalidInput(format!(
            "dimensions {} + {} do not sum to {n}",
            a.dim(),
            b.dim()
        )));
    }
    let mut total = 0i64;
    for (cell, ca) in a.iter() {
        let partner = transverse_partner(cell, n);
        let cb = b.coef(&partner);
        if cb != 0 {
            total += merge_sign(cell.span, partner.span) * ca * cb * hemi_factor(cell.hemi);
        }
    }
    Ok(total)
}

/// Same pairing for a real-coefficient witness chain from the LP oracle.
pub fn intersection_number_real(
    space: &Space,
    witness: &[(GridCell, f64)],
    b: &Chain,
) -> Result<f64> {
    if b.lattice() != Lattice::Offset {
        return Err(Error::LatticeMismatch);
    }
    let n = space.n();
    let mut total = 0.0;
    for (cell, ca) in witness {
        let partner = transverse_partner(cell, n);
        let cb = b.coef(&partner);
        if cb != 0 {
            total +=
                (merge_sign(cell.span, partner.span) * cb * hemi_factor(cell.hemi)) as f64 * ca;
        }
    }
    Ok(total)
}

fn check_linking_inputs(z1: &Chain, z2: &Chain) -> Result<()> {
    if z1.space() != z2.space() {
        return Err(Error::SpaceMismatch);
    }
    if !z1.space().is_double() {
        return Err(Error::InvalidInput("linking is defined on a double".into()));
    }
    if z1.lattice() != Lattice::Primal || z2.lattice() != Lattice::Offset {
        return Err(Error::LatticeMismatch);
    }
    let n = z1.space().n();
    if z1.dim() + z2.dim() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "linking needs dimensions k and n-k-1, got {} and {} with n = {n}",
            z1.dim(),
            z2.dim()
        )));
    }
    if !z1.boundary().is_zero() || !z2.boundary().is_zero() {
        return Err(Error::InvalidInput("linking arguments must be cycles".into()));
    }
    let hemis: Vec<Hemisphere> = {
        let mut hs: Vec<_> = z2.iter().map(|(c, _)| c.hemi).collect();
        hs.dedup();
        hs
    };
    if hemis.len() > 1 {
        return Err(Error::InvalidInput(
            "second cycle must lie in a single hemisphere's interior".into(),
        ));
    }
    if !z1.disjoint_closed(z2) {
        return Err(Error::InvalidInput("linking arguments have overlapping supports".into()));
    }
    Ok(())
}

/// Linking number of a primal k-cycle and an offset (n-k-1)-cycle with
/// disjoint closed supports: intersect the constructive filling of the first
/// with the second. Independent of the filling choice because the pairing of
/// a boundary with a cycle vanishes.
pub fn linking_number(z1: &Chain, z2: &Chain) -> Result<i64> {
    check_linking_inputs(z1, z2)?;
    let cert = fill_double(z1)?;
    intersection_number(&cert.filling, z2)
}

/// Linking computed against a caller-supplied filling of `z1` (for example
/// an integral minimal filling), for filling-independence cross-checks.
pub fn linking_with_filling(filling: &Chain, z1: &Chain, z2: &Chain) -> Result<i64> {
    check_linking_inputs(z1, z2)?;
    if filling.boundary() != z1.canonicalize() {
        return Err(Error::InvalidInput("supplied chain does not fill the first cycle".into()));
    }
    intersection_number(filling, z2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{DoubleGeometry, RectGeometry};

    fn double_space(axes: &[u32]) -> Space {
        Space::Double(DoubleGeometry::new(RectGeometry::new(axes.to_vec()).unwrap()))
    }

    #[test]
    fn cell_enumeration_counts() {
        // rectangle (2,2): 1-cells = 2 spans * (2 positions * 3 positions) = 12
        let g = Space::Rect(RectGeometry::new(vec![2, 2]).unwrap());
        assert_eq!(enumerate_cells(&g, 1, Lattice::Primal).len(), 12);
        // double (2,2): interior cells doubled, wall cells once.
        // vertical/horizontal 1-cells: per span 2*3=6 of which 4 on wall -> 6+2=8
        assert_eq!(enumerate_cells(&double_space(&[2, 2]), 1, Lattice::Primal).len(), 16);
        // offset 1-cells on the double: strictly interior, per hemisphere
        // span {1}: base2_1 in {1}, base2_2 in {1,3} -> 2; two spans, two hemis
        assert_eq!(enumerate_cells(&double_space(&[2, 2]), 1, Lattice::Offset).len(), 8);
    }

    #[test]
    fn min_filling_of_unit_cell_boundary() {
        let g = double_space(&[3, 3]);
        let sq = GridCell::primal(Hemisphere::N, &[1, 1], &[1, 2]).unwrap();
        let w = Chain::from_cells(g, 2, Lattice::Primal, [(sq, 1)]).unwrap();
        let z = w.boundary();
        let budget = LpBudget::default();
        let lp = min_filling(&z, SolveMode::Lp, &budget).unwrap();
        assert!((lp.value - 1.0).abs() < 1e-6);
        let ilp = min_filling(&z, SolveMode::Ilp, &budget).unwrap();
        assert!((ilp.value - 1.0).abs() < 1e-9);
        let witness = ilp.integral_witness(&w.space().clone(), 2, Lattice::Primal).unwrap();
        assert_eq!(witness.boundary(), z);
        assert_eq!(witness.mass(), 1);
    }

    #[test]
    fn min_filling_of_zero_and_non_cycle() {
        let g = double_space(&[3, 3]);
        let z = Chain::zero(g.clone(), 1, Lattice::Primal);
        assert_eq!(min_filling(&z, SolveMode::Lp, &LpBudget::default()).unwrap().value, 0.0);
        let e = GridCell::primal(Hemisphere::N, &[1, 1], &[1]).unwrap();
        let c = Chain::from_cells(g, 1, Lattice::Primal, [(e, 1)]).unwrap();
        assert!(matches!(
            min_filling(&c, SolveMode::Lp, &LpBudget::default()),
            Err(Error::NotACycle { .. })
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let g = double_space(&[4, 4, 4]);
        let sq = GridCell::primal(Hemisphere::N, &[1, 1, 1], &[1, 2]).unwrap();
        let z = Chain::from_cells(g, 2, Lattice::Primal, [(sq, 1)]).unwrap().boundary();
        let tiny = LpBudget { max_nonzeros: 10, max_nodes: 10 };
        assert!(matches!(
            min_filling(&z, SolveMode::Lp, &tiny),
            Err(Error::OverBudget { .. })
        ));
    }

    #[test]
    fn fundamental_class_pairs_with_offset_point() {
        let g = double_space(&[2, 2]);
        let top = GridCell::primal(Hemisphere::N, &[0, 0], &[1, 2]).unwrap();
        let a = Chain::from_cells(g.clone(), 2, Lattice::Primal, [(top, 1)]).unwrap();
        let p = GridCell::offset(Hemisphere::N, &[0, 0], &[]).unwrap();
        let b = Chain::from_cells(g, 0, Lattice::Offset, [(p, 1)]).unwrap();
        assert_eq!(intersection_number(&a, &b).unwrap(), 1);
        // bilinearity
        assert_eq!(intersection_number(&a.scaled(2), &b).unwrap(), 2);
        assert_eq!(intersection_number(&a, &b.scaled(-3)).unwrap(), -3);
    }

    #[test]
    fn disjoint_supports_do_not_pair() {
        let g = double_space(&[3, 3]);
        let top = GridCell::primal(Hemisphere::N, &[0, 0], &[1, 2]).unwrap();
        let a = Chain::from_cells(g.clone(), 2, Lattice::Primal, [(top, 1)]).unwrap();
        let p = GridCell::offset(Hemisphere::N, &[1, 1], &[]).unwrap();
        let b = Chain::from_cells(g, 0, Lattice::Offset, [(p, 1)]).unwrap();
        assert_eq!(intersection_number(&a, &b).unwrap(), 0);
    }

    #[test]
    fn same_lattice_pairing_rejected() {
        let g = double_space(&[2, 2]);
        let top = GridCell::primal(Hemisphere::N, &[0, 0], &[1, 2]).unwrap();
        let a = Chain::from_cells(g.clone(), 2, Lattice::Primal, [(top, 1)]).unwrap();
        let p = GridCell::primal(Hemisphere::N, &[1, 1], &[]).unwrap();
        let b = Chain::from_cells(g, 0, Lattice::Primal, [(p, 1)]).unwrap();
        assert!(matches!(intersection_number(&a, &b), Err(Error::LatticeMismatch)));
    }

    #[test]
    fn boundary_pairs_trivially_with_cycles() {
        // the pairing of boundary(W) with any offset cycle vanishes: the
        // canary for all sign conventions at once
        let g = double_space(&[4, 4, 4]);
        let w_cells = [
            (GridCell::primal(Hemisphere::N, &[0, 1, 2], &[1, 2, 3]).unwrap(), 1),
            (GridCell::primal(Hemisphere::S, &[2, 0, 1], &[1, 2, 3]).unwrap(), -2),
            (GridCell::primal(Hemisphere::N, &[1, 1, 1], &[1, 2, 3]).unwrap(), 3),
        ];
        let w = Chain::from_cells(g.clone(), 3, Lattice::Primal, w_cells).unwrap();
        // offset 1-cycle: boundary of an offset square, Northern interior
        let sq = GridCell::offset(Hemisphere::N, &[1, 1, 1], &[1, 2]).unwrap();
        let v = Chain::from_cells(g, 2, Lattice::Offset, [(sq, 1)]).unwrap().boundary();
        assert!(v.boundary().is_zero());
        assert_eq!(intersection_number(&w.boundary(), &v).unwrap(), 0);
    }

    #[test]
    fn instance_dump_has_matrix_lines() {
        let g = double_space(&[2, 2]);
        let sq = GridCell::primal(Hemisphere::N, &[0, 0], &[1, 2]).unwrap();
        let z = Chain::from_cells(g, 2, Lattice::Primal, [(sq, 1)]).unwrap().boundary();
        let dump = dump_instance(&z, &LpBudget::default()).unwrap();
        assert!(dump.lines().next().unwrap().starts_with("# columns"));
        assert!(dump.lines().any(|l| !l.starts_with('#')));
    }
}
