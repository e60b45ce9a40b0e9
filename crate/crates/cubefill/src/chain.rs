//! Cubical cells and integer chains on rectangles and doubles of rectangles.
//!
//! Coordinates are stored doubled (`base2 = 2 * coordinate`) so that the
//! half-integer offset lattice stays exact: primal cells have even entries,
//! offset cells odd entries. A unit cell along a spanned axis occupies
//! `[base2, base2 + 2]` in doubled units.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Hemisphere {
    N,
    S,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Lattice {
    Primal,
    Offset,
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lattice::Primal => write!(f, "primal"),
            Lattice::Offset => write!(f, "offset"),
        }
    }
}

/// Axis-aligned box with integer side lengths, sorted ascending.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RectGeometry {
    axes: Vec<u32>,
}

impl RectGeometry {
    pub fn new(axes: Vec<u32>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidInput("geometry needs at least one axis".into()));
        }
        if axes.len() > 32 {
            return Err(Error::InvalidInput("at most 32 axes supported".into()));
        }
        if axes.iter().any(|&r| r == 0) {
            return Err(Error::InvalidInput("all side lengths must be >= 1".into()));
        }
        if axes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(format!(
                "axes must be sorted ascending, got {axes:?}"
            )));
        }
        Ok(RectGeometry { axes })
    }

    pub fn n(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[u32] {
        &self.axes
    }

    /// Side length of a 1-based axis.
    pub fn axis_len(&self, axis: usize) -> u32 {
        self.axes[axis - 1]
    }

    /// Geometry with one axis removed (1-based index).
    pub fn drop_axis(&self, axis: usize) -> Result<RectGeometry> {
        let mut axes = self.axes.clone();
        if axis == 0 || axis > axes.len() {
            return Err(Error::InvalidInput(format!("axis {axis} out of range")));
        }
        axes.remove(axis - 1);
        RectGeometry::new(axes)
    }

    /// Geometry with a new axis of length `len` inserted at 1-based position `axis`.
    pub fn insert_axis(&self, axis: usize, len: u32) -> Result<RectGeometry> {
        let mut axes = self.axes.clone();
        if axis == 0 || axis > axes.len() + 1 {
            return Err(Error::InvalidInput(format!("axis {axis} out of range")));
        }
        axes.insert(axis - 1, len);
        RectGeometry::new(axes)
    }

    pub fn scaled(&self, lambda: u32) -> Result<RectGeometry> {
        RectGeometry::new(self.axes.iter().map(|&r| r * lambda).collect())
    }
}

/// The double of a rectangle: two copies (hemispheres N and S) glued along
/// their common boundary. Cells supported in the wall carry the canonical
/// hemisphere label N.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DoubleGeometry {
    rect: RectGeometry,
}

impl DoubleGeometry {
    pub fn new(rect: RectGeometry) -> Self {
        DoubleGeometry { rect }
    }

    pub fn rect(&self) -> &RectGeometry {
        &self.rect
    }

    /// All N top cells minus all S top cells; a cycle.
    pub fn fundamental_class(&self) -> Chain {
        let n = self.rect.n();
        let span = DirectionSet::full(n);
        let mut chain = Chain::zero(Space::Double(self.clone()), n, Lattice::Primal);
        let mut bases: Vec<i32> = vec![0; n];
        loop {
            let base2: Vec<i32> = bases.iter().map(|&b| 2 * b).collect();
            chain.add_term(GridCell::new(Hemisphere::N, base2.clone(), span), 1);
            chain.add_term(GridCell::new(Hemisphere::S, base2, span), -1);
            // odometer over bases
            let mut i = 0;
            loop {
                if i == n {
                    return chain.canonicalize();
                }
                bases[i] += 1;
                if (bases[i] as u32) < self.rect.axes[i] {
                    break;
                }
                bases[i] = 0;
                i += 1;
            }
        }
    }
}

/// Either a plain rectangle or the double of one.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Space {
    Rect(RectGeometry),
    Double(DoubleGeometry),
}

impl Space {
    pub fn rect(&self) -> &RectGeometry {
        match self {
            Space::Rect(r) => r,
            Space::Double(d) => d.rect(),
        }
    }

    pub fn is_double(&self) -> bool {
        matches!(self, Space::Double(_))
    }

    pub fn n(&self) -> usize {
        self.rect().n()
    }
}

/// Sorted set of distinct 1-based axis indices; stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DirectionSet(u32);

impl DirectionSet {
    pub fn empty() -> Self {
        DirectionSet(0)
    }

    pub fn full(n: usize) -> Self {
        if n == 32 {
            DirectionSet(u32::MAX)
        } else {
            DirectionSet((1u32 << n) - 1)
        }
    }

    /// From a raw bitmask (bit i-1 set means axis i is a member).
    pub fn from_mask(mask: u32) -> Self {
        DirectionSet(mask)
    }

    pub fn from_axes(axes: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &a in axes {
            if a == 0 || a > 32 {
                return Err(Error::InvalidInput(format!("axis {a} out of range 1..=32")));
            }
            let bit = 1u32 << (a - 1);
            if mask & bit != 0 {
                return Err(Error::InvalidInput(format!("duplicate axis {a}")));
            }
            mask |= bit;
        }
        Ok(DirectionSet(mask))
    }

    pub fn contains(self, axis: usize) -> bool {
        self.0 & (1u32 << (axis - 1)) != 0
    }

    pub fn with(self, axis: usize) -> Self {
        DirectionSet(self.0 | (1u32 << (axis - 1)))
    }

    pub fn without(self, axis: usize) -> Self {
        DirectionSet(self.0 & !(1u32 << (axis - 1)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Ascending 1-based member axes.
    pub fn axes(self) -> Vec<usize> {
        (1..=32).filter(|&a| self.contains(a)).collect()
    }

    pub fn min_axis(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize + 1)
        }
    }

    /// e(J): one less than the smallest member.
    pub fn free_index(self) -> Option<usize> {
        self.min_axis().map(|m| m - 1)
    }

    /// Number of members strictly below `axis`.
    pub fn count_below(self, axis: usize) -> u32 {
        (self.0 & ((1u32 << (axis - 1)) - 1)).count_ones()
    }

    /// Complement within axes 1..=n.
    pub fn complement(self, n: usize) -> Self {
        DirectionSet(Self::full(n).0 & !self.0)
    }

    /// Reindex members of a set over n-1 axes after inserting a new axis at
    /// 1-based position `axis`: members >= axis shift up by one.
    pub fn insert_reindex(self, axis: usize) -> Self {
        let low = self.0 & ((1u32 << (axis - 1)) - 1);
        let high = self.0 & !((1u32 << (axis - 1)) - 1);
        DirectionSet(low | (high << 1))
    }

    /// Inverse of `insert_reindex`; `axis` must not be a member.
    pub fn remove_reindex(self, axis: usize) -> Self {
        debug_assert!(!self.contains(axis));
        let low = self.0 & ((1u32 << (axis - 1)) - 1);
        let high = self.0 & !((1u32 << axis) - 1);
        DirectionSet(low | (high >> 1))
    }
}

impl fmt::Debug for DirectionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.axes().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// One oriented cubical cell. `base2` holds doubled coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridCell {
    pub hemi: Hemisphere,
    pub span: DirectionSet,
    pub base2: Vec<i32>,
}

impl GridCell {
    pub fn new(hemi: Hemisphere, base2: Vec<i32>, span: DirectionSet) -> Self {
        GridCell { hemi, span, base2 }
    }

    /// Primal cell from unit coordinates.
    pub fn primal(hemi: Hemisphere, base: &[i32], span_axes: &[usize]) -> Result<Self> {
        Ok(GridCell::new(
            hemi,
            base.iter().map(|&b| 2 * b).collect(),
            DirectionSet::from_axes(span_axes)?,
        ))
    }

    /// Offset cell from unit coordinates; actual position is `base + 1/2`
    /// in every coordinate.
    pub fn offset(hemi: Hemisphere, base: &[i32], span_axes: &[usize]) -> Result<Self> {
        Ok(GridCell::new(
            hemi,
            base.iter().map(|&b| 2 * b + 1).collect(),
            DirectionSet::from_axes(span_axes)?,
        ))
    }

    pub fn dim(&self) -> usize {
        self.span.len()
    }

    fn validate(&self, space: &Space, lattice: Lattice) -> Result<()> {
        let rect = space.rect();
        let n = rect.n();
        if self.base2.len() != n {
            return Err(Error::InvalidInput(format!(
                "cell has {} coordinates, geometry has {n} axes",
                self.base2.len()
            )));
        }
        if let Some(m) = self.span.axes().last() {
            if *m > n {
                return Err(Error::InvalidInput(format!("span axis {m} exceeds dimension {n}")));
            }
        }
        if !space.is_double() && self.hemi == Hemisphere::S {
            return Err(Error::InvalidInput("hemisphere S cell on a plain rectangle".into()));
        }
        for axis in 1..=n {
            let b = self.base2[axis - 1];
            let r2 = 2 * rect.axis_len(axis) as i32;
            let (par, lo, hi) = match (lattice, self.span.contains(axis)) {
                (Lattice::Primal, true) => (0, 0, r2 - 2),
                (Lattice::Primal, false) => (0, 0, r2),
                (Lattice::Offset, true) => (1, 1, r2 - 3),
                (Lattice::Offset, false) => (1, 1, r2 - 1),
            };
            if b.rem_euclid(2) != par || b < lo || b > hi {
                return Err(Error::InvalidInput(format!(
                    "coordinate {b}/2 on axis {axis} out of range for {lattice} cell (span {:?})",
                    self.span
                )));
            }
        }
        Ok(())
    }

    /// True if the cell is supported in the wall of the rectangle: some
    /// unspanned coordinate equals 0 or R_i. Offset cells never are.
    pub fn on_wall(&self, rect: &RectGeometry) -> bool {
        (1..=rect.n()).any(|axis| {
            !self.span.contains(axis)
                && (self.base2[axis - 1] == 0 || self.base2[axis - 1] == 2 * rect.axis_len(axis) as i32)
        })
    }

    /// Face of the cell on a spanned axis. `top` picks the far face.
    pub fn face(&self, axis: usize, top: bool) -> GridCell {
        debug_assert!(self.span.contains(axis));
        let mut base2 = self.base2.clone();
        if top {
            base2[axis - 1] += 2;
        }
        GridCell::new(self.hemi, base2, self.span.without(axis))
    }

    /// Closed interval (in doubled units) occupied along a 1-based axis.
    fn extent(&self, axis: usize) -> (i32, i32) {
        let b = self.base2[axis - 1];
        if self.span.contains(axis) {
            (b, b + 2)
        } else {
            (b, b)
        }
    }
}

impl fmt::Debug for GridCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self
            .base2
            .iter()
            .map(|&b| {
                if b % 2 == 0 {
                    format!("{}", b / 2)
                } else {
                    format!("{}/2", b)
                }
            })
            .collect();
        write!(f, "{:?}[{}]{:?}", self.hemi, coords.join(","), self.span)
    }
}

/// Do the closed supports of two cells intersect? Cells in different
/// hemispheres meet only across the wall.
pub fn cells_overlap_closed(a: &GridCell, b: &GridCell, rect: &RectGeometry) -> bool {
    let n = rect.n();
    let mut lo = vec![0i32; n];
    let mut hi = vec![0i32; n];
    for axis in 1..=n {
        let (la, ha) = a.extent(axis);
        let (lb, hb) = b.extent(axis);
        let l = la.max(lb);
        let h = ha.min(hb);
        if l > h {
            return false;
        }
        lo[axis - 1] = l;
        hi[axis - 1] = h;
    }
    if a.hemi == b.hemi {
        return true;
    }
    // Different hemispheres: the overlap region must touch the wall.
    (1..=n).any(|axis| {
        let r2 = 2 * rect.axis_len(axis) as i32;
        lo[axis - 1] == 0 || hi[axis - 1] == r2
    })
}

/// Directional volumes of a chain: `Vol_J` indexed by span set, plus mass.
/// For axis-aligned unit cells mass equals the sum of all `Vol_J` exactly.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct VolumeVector {
    by_span: BTreeMap<DirectionSet, u64>,
    mass: u64,
}

impl VolumeVector {
    pub fn vol(&self, span: DirectionSet) -> u64 {
        self.by_span.get(&span).copied().unwrap_or(0)
    }

    pub fn mass(&self) -> u64 {
        self.mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (DirectionSet, u64)> + '_ {
        self.by_span.iter().map(|(&s, &v)| (s, v))
    }
}

/// Sparse integer chain: formal sum of cells of one dimension on one lattice.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Chain {
    space: Space,
    dim: usize,
    lattice: Lattice,
    cells: BTreeMap<GridCell, i64>,
}

impl Chain {
    pub fn zero(space: Space, dim: usize, lattice: Lattice) -> Chain {
        Chain { space, dim, lattice, cells: BTreeMap::new() }
    }

    pub fn from_cells<I>(space: Space, dim: usize, lattice: Lattice, cells: I) -> Result<Chain>
    where
        I: IntoIterator<Item = (GridCell, i64)>,
    {
        let mut chain = Chain::zero(space, dim, lattice);
        for (cell, coef) in cells {
            if cell.dim() != dim {
                return Err(Error::InvalidInput(format!(
                    "cell {cell:?} has dimension {}, chain has {dim}",
                    cell.dim()
                )));
            }
            cell.validate(&chain.space, lattice)?;
            chain.add_term(cell, coef);
        }
        Ok(chain)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GridCell, i64)> + '_ {
        self.cells.iter().map(|(c, &v)| (c, v))
    }

    pub fn coef(&self, cell: &GridCell) -> i64 {
        self.cells.get(cell).copied().unwrap_or(0)
    }

    /// Accumulate a term, dropping the entry if it cancels to zero.
    /// Internal: does not validate the cell.
    pub(crate) fn add_term(&mut self, cell: GridCell, coef: i64) {
        if coef == 0 {
            return;
        }
        match self.cells.entry(cell) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn mass(&self) -> u64 {
        self.cells.values().map(|&v| v.unsigned_abs()).sum()
    }

    pub fn volumes(&self) -> VolumeVector {
        let mut vv = VolumeVector::default();
        for (cell, &coef) in &self.cells {
            *vv.by_span.entry(cell.span).or_insert(0) += coef.unsigned_abs();
            vv.mass += coef.unsigned_abs();
        }
        vv
    }

    fn compatible(&self, other: &Chain) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch);
        }
        if self.dim != other.dim && !self.is_zero() && !other.is_zero() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Chain) -> Result<Chain> {
        self.compatible(other)?;
        let mut out = self.clone();
        if out.is_zero() {
            out.dim = if other.is_zero() { self.dim } else { other.dim };
        }
        for (cell, &coef) in &other.cells {
            out.add_term(cell.clone(), coef);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Chain) -> Result<Chain> {
        self.try_add(&other.scaled(-1))
    }

    pub fn scaled(&self, c: i64) -> Chain {
        let mut out = Chain::zero(self.space.clone(), self.dim, self.lattice);
        if c != 0 {
            for (cell, &coef) in &self.cells {
                out.cells.insert(cell.clone(), coef * c);
            }
        }
        out
    }

    /// Standard cubical boundary: for a cell with sorted span axes
    /// `a_0 < a_1 < ...`, the face pair on `a_t` enters with sign `(-1)^t`,
    /// top minus bottom. On a double the result is canonicalized.
    pub fn boundary(&self) -> Chain {
        if self.dim == 0 {
            return Chain::zero(self.space.clone(), 0, self.lattice);
        }
        let mut out = Chain::zero(self.space.clone(), self.dim - 1, self.lattice);
        for (cell, &coef) in &self.cells {
            for (t, axis) in cell.span.axes().into_iter().enumerate() {
                let sign = if t % 2 == 0 { 1 } else { -1 };
                out.add_term(cell.face(axis, true), coef * sign);
                out.add_term(cell.face(axis, false), -coef * sign);
            }
        }
        if self.space.is_double() {
            out.canonicalize()
        } else {
            out
        }
    }

    /// Relabel every wall-supported cell to hemisphere N and merge. Idempotent.
    pub fn canonicalize(&self) -> Chain {
        if !self.space.is_double() {
            return self.clone();
        }
        let rect = self.space.rect().clone();
        let mut out = Chain::zero(self.space.clone(), self.dim, self.lattice);
        for (cell, &coef) in &self.cells {
            if cell.hemi == Hemisphere::S && cell.on_wall(&rect) {
                let mut c = cell.clone();
                c.hemi = Hemisphere::N;
                out.add_term(c, coef);
            } else {
                out.add_term(cell.clone(), coef);
            }
        }
        out
    }

    pub fn is_canonical(&self) -> bool {
        if !self.space.is_double() {
            return true;
        }
        let rect = self.space.rect();
        self.cells
            .keys()
            .all(|c| !(c.hemi == Hemisphere::S && c.on_wall(rect)))
    }

    /// Split a canonical chain on a double into (z_N, z_S): z_S holds the
    /// strictly Southern cells, z_N the rest including the equator.
    pub fn hemisphere_split(&self) -> Result<(Chain, Chain)> {
        if !self.space.is_double() {
            return Err(Error::InvalidInput("hemisphere_split needs a double".into()));
        }
        let z = self.canonicalize();
        let mut zn = Chain::zero(z.space.clone(), z.dim, z.lattice);
        let mut zs = Chain::zero(z.space.clone(), z.dim, z.lattice);
        for (cell, &coef) in &z.cells {
            match cell.hemi {
                Hemisphere::N => zn.add_term(cell.clone(), coef),
                Hemisphere::S => zs.add_term(cell.clone(), coef),
            }
        }
        Ok((zn, zs))
    }

    /// Cells of one hemisphere as a chain on the underlying rectangle
    /// (N keeps the equator cells).
    pub fn hemisphere_chain(&self, hemi: Hemisphere) -> Result<Chain> {
        if !self.space.is_double() {
            return Err(Error::InvalidInput("hemisphere_chain needs a double".into()));
        }
        let z = self.canonicalize();
        let mut out = Chain::zero(Space::Rect(z.space.rect().clone()), z.dim, z.lattice);
        for (cell, &coef) in &z.cells {
            if cell.hemi == hemi {
                let mut c = cell.clone();
                c.hemi = Hemisphere::N;
                out.add_term(c, coef);
            }
        }
        Ok(out)
    }

    /// Embed a chain on a rectangle into the double, labelled `hemi`,
    /// and canonicalize.
    pub fn embed_double(&self, hemi: Hemisphere) -> Result<Chain> {
        let rect = match &self.space {
            Space::Rect(r) => r.clone(),
            Space::Double(_) => {
                return Err(Error::InvalidInput("chain already lives on a double".into()))
            }
        };
        let mut out = Chain::zero(
            Space::Double(DoubleGeometry::new(rect)),
            self.dim,
            self.lattice,
        );
        for (cell, &coef) in &self.cells {
            let mut c = cell.clone();
            c.hemi = hemi;
            out.add_term(c, coef);
        }
        Ok(out.canonicalize())
    }

    /// Every cell supported in the wall of the rectangle.
    pub fn supported_in_wall(&self) -> bool {
        let rect = self.space.rect();
        self.cells.keys().all(|c| c.on_wall(rect))
    }

    /// Column over the chain: Sigma_j [j, j+1] x c for j in lo..hi along a new
    /// axis of length `axis_len` inserted at 1-based position `axis`. The
    /// product carries the shuffle sign so that
    /// boundary(column) = endcaps - column(boundary(c)) holds exactly.
    pub fn interval_product(&self, axis: usize, axis_len: u32, lo: u32, hi: u32) -> Result<Chain> {
        let rect = match &self.space {
            Space::Rect(r) => r,
            Space::Double(_) => {
                return Err(Error::InvalidInput("interval_product needs a rectangle".into()))
            }
        };
        if self.lattice != Lattice::Primal {
            return Err(Error::LatticeMismatch);
        }
        if hi > axis_len || lo > hi {
            return Err(Error::InvalidInput(format!("bad range [{lo},{hi}] for axis length {axis_len}")));
        }
        let target = rect.insert_axis(axis, axis_len)?;
        let mut out = Chain::zero(Space::Rect(target), self.dim + 1, self.lattice);
        for (cell, &coef) in &self.cells {
            let span = cell.span.insert_reindex(axis).with(axis);
            let sign = if cell.span.insert_reindex(axis).count_below(axis) % 2 == 0 {
                1
            } else {
                -1
            };
            for j in lo..hi {
                let mut base2 = cell.base2.clone();
                base2.insert(axis - 1, 2 * j as i32);
                out.add_term(GridCell::new(cell.hemi, base2, span), coef * sign);
            }
        }
        Ok(out)
    }

    /// Embed the chain at a fixed level of a new axis (an endcap of the column).
    pub fn embed_at_level(&self, axis: usize, axis_len: u32, level: u32) -> Result<Chain> {
        let rect = match &self.space {
            Space::Rect(r) => r,
            Space::Double(_) => {
                return Err(Error::InvalidInput("embed_at_level needs a rectangle".into()))
            }
        };
        if level > axis_len {
            return Err(Error::InvalidInput("level out of range".into()));
        }
        let target = rect.insert_axis(axis, axis_len)?;
        let mut out = Chain::zero(Space::Rect(target), self.dim, self.lattice);
        for (cell, &coef) in &self.cells {
            let span = cell.span.insert_reindex(axis);
            let mut base2 = cell.base2.clone();
            base2.insert(axis - 1, 2 * level as i32);
            out.add_term(GridCell::new(cell.hemi, base2, span), coef);
        }
        Ok(out)
    }

    /// Cells spanning `axis` at level `[level, level+1]`, with that axis
    /// removed; the slice of the chain. Inverse (up to restriction) of
    /// `interval_product`.
    pub fn extract_slice(&self, axis: usize, level: u32) -> Result<Chain> {
        let rect = match &self.space {
            Space::Rect(r) => r,
            Space::Double(_) => {
                return Err(Error::InvalidInput("extract_slice needs a rectangle".into()))
            }
        };
        if self.dim == 0 {
            return Err(Error::InvalidInput("cannot slice a 0-chain".into()));
        }
        let target = rect.drop_axis(axis)?;
        let mut out = Chain::zero(Space::Rect(target), self.dim - 1, self.lattice);
        for (cell, &coef) in &self.cells {
            if !cell.span.contains(axis) || cell.base2[axis - 1] != 2 * level as i32 {
                continue;
            }
            let reduced = cell.span.without(axis);
            let sign = if reduced.count_below(axis) % 2 == 0 { 1 } else { -1 };
            let span = reduced.remove_reindex(axis);
            let mut base2 = cell.base2.clone();
            base2.remove(axis - 1);
            out.add_term(GridCell::new(cell.hemi, base2, span), coef * sign);
        }
        Ok(out)
    }

    /// Translate by `delta` unit steps along a 1-based axis.
    pub fn translated(&self, axis: usize, delta: i32) -> Result<Chain> {
        let mut out = Chain::zero(self.space.clone(), self.dim, self.lattice);
        for (cell, &coef) in &self.cells {
            let mut c = cell.clone();
            c.base2[axis - 1] += 2 * delta;
            c.validate(&self.space, self.lattice)?;
            out.add_term(c, coef);
        }
        Ok(out)
    }

    /// Closed supports disjoint from another chain on the same space?
    pub fn disjoint_closed(&self, other: &Chain) -> bool {
        let rect = self.space.rect();
        for a in self.cells.keys() {
            for b in other.cells.keys() {
                if cells_overlap_closed(a, b, rect) {
                    return false;
                }
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// JSON serialization

#[derive(Serialize, Deserialize)]
struct GeometryDto {
    axes: Vec<u32>,
    double: bool,
}

#[derive(Serialize, Deserialize)]
struct CellDto {
    hemi: Hemisphere,
    base: Vec<i32>,
    span: Vec<usize>,
    coef: i64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    half: bool,
}

#[derive(Serialize, Deserialize)]
struct ChainDto {
    geometry: GeometryDto,
    dimension: usize,
    lattice: String,
    cells: Vec<CellDto>,
}

impl Chain {
    pub fn to_json(&self) -> serde_json::Value {
        let dto = ChainDto {
            geometry: GeometryDto {
                axes: self.space.rect().axes().to_vec(),
                double: self.space.is_double(),
            },
            dimension: self.dim,
            lattice: self.lattice.to_string(),
            cells: self
                .cells
                .iter()
                .map(|(cell, &coef)| {
                    let half = self.lattice == Lattice::Offset;
                    CellDto {
                        hemi: cell.hemi,
                        // offset bases stay doubled (with half flag) to stay exact
                        base: if half {
                            cell.base2.clone()
                        } else {
                            cell.base2.iter().map(|&b| b / 2).collect()
                        },
                        span: cell.span.axes(),
                        coef,
                        half,
                    }
                })
                .collect(),
        };
        serde_json::to_value(dto).expect("chain serialization")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Chain> {
        let dto: ChainDto = serde_json::from_value(value.clone())?;
        let rect = RectGeometry::new(dto.geometry.axes)?;
        let space = if dto.geometry.double {
            Space::Double(DoubleGeometry::new(rect))
        } else {
            Space::Rect(rect)
        };
        let lattice = match dto.lattice.as_str() {
            "primal" => Lattice::Primal,
            "offset" => Lattice::Offset,
            other => return Err(Error::InvalidInput(format!("unknown lattice {other:?}"))),
        };
        let cells = dto
            .cells
            .into_iter()
            .map(|c| {
                let base2: Vec<i32> = if c.half {
                    c.base.clone()
                } else {
                    c.base.iter().map(|&b| 2 * b).collect()
                };
                let span = DirectionSet::from_axes(&c.span)?;
                Ok((GridCell::new(c.hemi, base2, span), c.coef))
            })
            .collect::<Result<Vec<_>>>()?;
        Chain::from_cells(space, dto.dimension, lattice, cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(axes: &[u32]) -> RectGeometry {
        RectGeometry::new(axes.to_vec()).unwrap()
    }

    fn double(axes: &[u32]) -> DoubleGeometry {
        DoubleGeometry::new(rect(axes))
    }

    #[test]
    fn direction_set_free_index() {
        // e({3,6,8}) = 2
        let j = DirectionSet::from_axes(&[3, 6, 8]).unwrap();
        assert_eq!(j.free_index(), Some(2));
    }

    #[test]
    fn boundary_of_single_edge() {
        // [0,1] x {0} in R=(2,2) -> point(1,0) - point(0,0)
        let g = Space::Rect(rect(&[2, 2]));
        let edge = GridCell::primal(Hemisphere::N, &[0, 0], &[1]).unwrap();
        let c = Chain::from_cells(g.clone(), 1, Lattice::Primal, [(edge, 1)]).unwrap();
        let b = c.boundary();
        let p1 = GridCell::primal(Hemisphere::N, &[1, 0], &[]).unwrap();
        let p0 = GridCell::primal(Hemisphere::N, &[0, 0], &[]).unwrap();
        assert_eq!(b.coef(&p1), 1);
        assert_eq!(b.coef(&p0), -1);
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn boundary_squares_to_zero_on_double() {
        let g = Space::Double(double(&[2, 3, 4]));
        let mut cells = Vec::new();
        // a handful of 3-cells with mixed hemispheres and coefficients
        for (h, b, c) in [
            (Hemisphere::N, [0, 0, 0], 1),
            (Hemisphere::S, [1, 1, 2], -2),
            (Hemisphere::S, [0, 2, 3], 3),
            (Hemisphere::N, [1, 0, 1], 1),
        ] {
            cells.push((GridCell::primal(h, &b, &[1, 2, 3]).unwrap(), c));
        }
        let c = Chain::from_cells(g, 3, Lattice::Primal, cells).unwrap();
        assert!(c.boundary().boundary().is_zero());
    }

    #[test]
    fn boundary_of_unit_cube_volumes() {
        let g = Space::Rect(rect(&[3, 3, 3]));
        let cube = GridCell::primal(Hemisphere::N, &[1, 1, 1], &[1, 2, 3]).unwrap();
        let c = Chain::from_cells(g, 3, Lattice::Primal, [(cube, 1)]).unwrap();
        let vv = c.boundary().volumes();
        assert_eq!(vv.mass(), 6);
        for axes in [[1, 2], [1, 3], [2, 3]] {
            assert_eq!(vv.vol(DirectionSet::from_axes(&axes).unwrap()), 2);
        }
    }

    #[test]
    fn unit_square_volume_vector() {
        let g = Space::Rect(rect(&[3, 3, 3]));
        let sq = GridCell::primal(Hemisphere::N, &[0, 0, 1], &[1, 2]).unwrap();
        let c = Chain::from_cells(g, 2, Lattice::Primal, [(sq, 1)]).unwrap();
        let vv = c.volumes();
        assert_eq!(vv.vol(DirectionSet::from_axes(&[1, 2]).unwrap()), 1);
        assert_eq!(vv.vol(DirectionSet::from_axes(&[1, 3]).unwrap()), 0);
        assert_eq!(vv.mass(), 1);
    }

    #[test]
    fn canonicalize_wall_cell_and_cancellation() {
        let g = Space::Double(double(&[3, 3]));
        // S cell lying in wall x_2 = 0
        let wall_s = GridCell::primal(Hemisphere::S, &[1, 0], &[1]).unwrap();
        let c = Chain::from_cells(g.clone(), 1, Lattice::Primal, [(wall_s.clone(), 1)]).unwrap();
        let canon = c.canonicalize();
        let wall_n = GridCell::primal(Hemisphere::N, &[1, 0], &[1]).unwrap();
        assert_eq!(canon.coef(&wall_n), 1);
        assert_eq!(canon.len(), 1);

        // N + (-1) S copy of the same equator cell cancels
        let c2 = Chain::from_cells(
            g,
            1,
            Lattice::Primal,
            [(wall_n, 1), (wall_s, -1)],
        )
        .unwrap();
        assert!(c2.canonicalize().is_zero());
    }

    #[test]
    fn fundamental_class_is_cycle() {
        let g = double(&[2, 3, 4]);
        let fc = g.fundamental_class();
        assert_eq!(fc.mass() as usize, 2 * 2 * 3 * 4);
        assert!(fc.boundary().is_zero());
    }

    #[test]
    fn column_over_point_has_expected_mass() {
        // point {1} in R'=(3) times full axis-1 range of R=(3,3)
        let g = Space::Rect(rect(&[3]));
        let p = GridCell::primal(Hemisphere::N, &[1], &[]).unwrap();
        let c = Chain::from_cells(g, 0, Lattice::Primal, [(p, 1)]).unwrap();
        let col = c.interval_product(1, 3, 0, 3).unwrap();
        assert_eq!(col.mass(), 3);
        assert_eq!(col.dim(), 1);
        assert!(col.iter().all(|(cell, _)| cell.span.contains(1)));
    }

    #[test]
    fn empty_interval_product_is_empty() {
        let g = Space::Rect(rect(&[3]));
        let c = Chain::zero(g, 0, Lattice::Primal);
        assert!(c.interval_product(1, 3, 0, 3).unwrap().is_zero());
    }

    #[test]
    fn column_boundary_identity() {
        // boundary(column) = endcaps - column(boundary) on a small chain
        let g = Space::Rect(rect(&[3, 4]));
        let cells = [
            (GridCell::primal(Hemisphere::N, &[0, 1], &[1]).unwrap(), 1),
            (GridCell::primal(Hemisphere::N, &[1, 2], &[2]).unwrap(), -2),
            (GridCell::primal(Hemisphere::N, &[2, 3], &[1]).unwrap(), 1),
        ];
        let c = Chain::from_cells(g, 1, Lattice::Primal, cells).unwrap();
        let (axis, len, lo, hi) = (2, 4, 1, 3);
        let col = c.interval_product(axis, len, lo, hi).unwrap();
        let endcaps = c
            .embed_at_level(axis, len, hi)
            .unwrap()
            .try_sub(&c.embed_at_level(axis, len, lo).unwrap())
            .unwrap();
        let expected = endcaps
            .try_sub(&c.boundary().interval_product(axis, len, lo, hi).unwrap())
            .unwrap();
        assert_eq!(col.boundary(), expected);
    }

    #[test]
    fn json_round_trip() {
        let g = Space::Double(double(&[2, 4, 4]));
        let cells = [
            (GridCell::primal(Hemisphere::N, &[0, 2, 2], &[1]).unwrap(), 1),
            (GridCell::primal(Hemisphere::S, &[1, 2, 2], &[1]).unwrap(), -1),
        ];
        let c = Chain::from_cells(g, 1, Lattice::Primal, cells).unwrap();
        let back = Chain::from_json(&c.to_json()).unwrap();
        assert_eq!(c, back);

        let g2 = Space::Double(double(&[4, 4, 4]));
        let off = [(GridCell::offset(Hemisphere::N, &[1, 1, 1], &[2, 3]).unwrap(), 2)];
        let c2 = Chain::from_cells(g2, 2, Lattice::Offset, off).unwrap();
        let back2 = Chain::from_json(&c2.to_json()).unwrap();
        assert_eq!(c2, back2);
    }

    #[test]
    fn cross_lattice_addition_rejected() {
        let g = Space::Rect(rect(&[4, 4]));
        let a = Chain::from_cells(
            g.clone(),
            0,
            Lattice::Primal,
            [(GridCell::primal(Hemisphere::N, &[1, 1], &[]).unwrap(), 1)],
        )
        .unwrap();
        let b = Chain::from_cells(
            g,
            0,
            Lattice::Offset,
            [(GridCell::offset(Hemisphere::N, &[1, 1], &[]).unwrap(), 1)],
        )
        .unwrap();
        assert!(matches!(a.try_add(&b), Err(Error::LatticeMismatch)));
    }

    #[test]
    fn offset_cells_stay_off_the_wall() {
        let g = Space::Rect(rect(&[2, 2]));
        // offset cell at the boundary would need base2 = -1 or 2R-1 spanning; reject
        let bad = GridCell::new(Hemisphere::N, vec![3, 1], DirectionSet::from_axes(&[1]).unwrap());
        assert!(Chain::from_cells(g, 1, Lattice::Offset, [(bad, 1)]).is_err());
    }
}
