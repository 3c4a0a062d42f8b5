//! Incidence structures, mosaics, and exact verification of tactical
//! configurations, BIBDs and GDDs.
//!
//! Everything here is integer arithmetic. Incidence matrices are dense,
//! row `x` (point) by column `s` (block index).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesignError {
    #[error("incidence data has {got} cells, expected {expected}")]
    BadShape { expected: usize, got: usize },
    #[error("incidence entry {0} is not 0 or 1")]
    NotBinary(u8),
    #[error("members have mismatched dimensions: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("point classes have unequal sizes")]
    UnequalClasses,
    #[error("class assignment covers {got} points, expected {expected}")]
    ClassLength { expected: usize, got: usize },
    #[error("color {0} is never attained")]
    EmptyMember(usize),
    #[error("function returned color {color} outside the color set of size {colors}")]
    ColorOutOfRange { color: usize, colors: usize },
    #[error("mosaic has no members")]
    NoMembers,
    #[error("not a mosaic: cell (x={x}, s={s}) is covered {count} times")]
    NotMosaic { x: usize, s: usize, count: usize },
}

/// 0/1 incidence matrix of points × block indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceStructure {
    v: usize,
    b: usize,
    cells: Vec<u8>,
}

impl IncidenceStructure {
    pub fn new(v: usize, b: usize, cells: Vec<u8>) -> Result<Self, DesignError> {
        if cells.len() != v * b {
            return Err(DesignError::BadShape {
                expected: v * b,
                got: cells.len(),
            });
        }
        if let Some(&bad) = cells.iter().find(|&&c| c > 1) {
            return Err(DesignError::NotBinary(bad));
        }
        Ok(Self { v, b, cells })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, DesignError> {
        let v = rows.len();
        let b = rows.first().map_or(0, Vec::len);
        let cells: Vec<u8> = rows.iter().flatten().copied().collect();
        Self::new(v, b, cells)
    }

    pub fn zeros(v: usize, b: usize) -> Self {
        Self {
            v,
            b,
            cells: vec![0; v * b],
        }
    }

    pub fn from_fn(v: usize, b: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut cells = Vec::with_capacity(v * b);
        for x in 0..v {
            for s in 0..b {
                cells.push(f(x, s) as u8);
            }
        }
        Self { v, b, cells }
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.v
    }

    #[inline]
    pub fn blocks(&self) -> usize {
        self.b
    }

    #[inline]
    pub fn get(&self, x: usize, s: usize) -> bool {
        self.cells[x * self.b + s] == 1
    }

    pub fn set(&mut self, x: usize, s: usize, on: bool) {
        self.cells[x * self.b + s] = on as u8;
    }

    pub fn row(&self, x: usize) -> &[u8] {
        &self.cells[x * self.b..(x + 1) * self.b]
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(|&c| c == 0)
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.v)
            .map(|x| self.row(x).iter().map(|&c| c as usize).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0usize; self.b];
        for x in 0..self.v {
            for (acc, &c) in sums.iter_mut().zip(self.row(x)) {
                *acc += c as usize;
            }
        }
        sums
    }

    /// Points incident with block `s`.
    pub fn block(&self, s: usize) -> Vec<usize> {
        (0..self.v).filter(|&x| self.get(x, s)).collect()
    }

    /// `N Nᵀ` over the integers: entry `(x, x')` counts blocks shared by `x` and `x'`.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let rows: Vec<Vec<usize>> = (0..self.v)
            .map(|x| (0..self.b).filter(|&s| self.get(x, s)).collect())
            .collect();
        (0..self.v)
            .map(|x| {
                (0..self.v)
                    .map(|y| rows[x].iter().filter(|&&s| self.get(y, s)).count() as i64)
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticalParams {
    pub v: usize,
    pub b: usize,
    pub k: usize,
    pub r: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibdParams {
    pub v: usize,
    pub b: usize,
    pub k: usize,
    pub r: usize,
    pub lambda: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GddParams {
    pub v: usize,
    pub b: usize,
    pub k: usize,
    pub r: usize,
    pub u: usize,
    pub m: usize,
    pub lambda1: usize,
    pub lambda2: usize,
}

impl GddParams {
    /// `r(k−1) = λ₁(u−1) + λ₂(m−1)u` and `v = um`.
    pub fn satisfies_relation(&self) -> bool {
        self.v == self.u * self.m
            && self.r * (self.k.saturating_sub(1)) == self.lambda1 * (self.u - 1) + self.lambda2 * (self.m - 1) * self.u
    }

    /// A BIBD viewed as a GDD with singleton classes.
    pub fn from_bibd(p: &BibdParams) -> Self {
        Self {
            v: p.v,
            b: p.b,
            k: p.k,
            r: p.r,
            u: 1,
            m: p.v,
            lambda1: p.lambda,
            lambda2: p.lambda,
        }
    }
}

/// Most specific classification of an incidence structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignParams {
    Tactical(TacticalParams),
    Bibd(BibdParams),
    Gdd(GddParams),
}

impl DesignParams {
    pub fn tactical(&self) -> TacticalParams {
        match *self {
            DesignParams::Tactical(p) => p,
            DesignParams::Bibd(p) => TacticalParams {
                v: p.v,
                b: p.b,
                k: p.k,
                r: p.r,
            },
            DesignParams::Gdd(p) => TacticalParams {
                v: p.v,
                b: p.b,
                k: p.k,
                r: p.r,
            },
        }
    }
}

/// Partition of the point set into equal-size classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassPartition {
    class_of: Vec<usize>,
    m: usize,
    u: usize,
}

impl ClassPartition {
    /// Builds from a class index per point; indices are relabelled densely.
    pub fn new(class_of: &[usize]) -> Result<Self, DesignError> {
        let mut labels: Vec<usize> = class_of.to_vec();
        labels.sort_unstable();
        labels.dedup();
        let dense: Vec<usize> = class_of.iter().map(|c| labels.binary_search(c).unwrap()).collect();
        let m = labels.len();
        let mut sizes = vec![0usize; m];
        for &c in &dense {
            sizes[c] += 1;
        }
        let u = sizes.first().copied().unwrap_or(0);
        if sizes.iter().any(|&s| s != u) {
            return Err(DesignError::UnequalClasses);
        }
        Ok(Self { class_of: dense, m, u })
    }

    pub fn singletons(v: usize) -> Self {
        Self {
            class_of: (0..v).collect(),
            m: v,
            u: 1,
        }
    }

    /// Consecutive runs of `u` points.
    pub fn contiguous(m: usize, u: usize) -> Self {
        Self {
            class_of: (0..m * u).map(|x| x / u).collect(),
            m,
            u,
        }
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn points(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_count(&self) -> usize {
        self.m
    }

    pub fn class_size(&self) -> usize {
        self.u
    }

    /// Members of class `i`, ascending.
    pub fn class_members(&self, i: usize) -> Vec<usize> {
        (0..self.points()).filter(|&x| self.class_of[x] == i).collect()
    }

    /// The 0/1 matrix `C` with `C[x][x'] = 1` iff same class.
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        let v = self.points();
        (0..v)
            .map(|x| (0..v).map(|y| (self.class_of[x] == self.class_of[y]) as i64).collect())
            .collect()
    }
}

/// Row and column sums are constant and `b k = v r`.
pub fn verify_tactical(inc: &IncidenceStructure) -> Option<TacticalParams> {
    if inc.is_empty() {
        return None;
    }
    let rows = inc.row_sums();
    let cols = inc.col_sums();
    let r = rows[0];
    let k = cols[0];
    if rows.iter().any(|&x| x != r) || cols.iter().any(|&x| x != k) {
        return None;
    }
    let p = TacticalParams {
        v: inc.points(),
        b: inc.blocks(),
        k,
        r,
    };
    (p.b * p.k == p.v * p.r).then_some(p)
}

/// Tactical with `k ≥ 2`, `v ≥ 2` and a constant pair count λ; the matrix
/// identity `N Nᵀ = (r−λ) I + λ J` is checked exactly.
pub fn verify_bibd(inc: &IncidenceStructure) -> Option<BibdParams> {
    let t = verify_tactical(inc)?;
    if t.v < 2 || t.k < 2 {
        return None;
    }
    let gram = inc.gram();
    let lambda = gram[0][1];
    for (x, row) in gram.iter().enumerate() {
        for (y, &g) in row.iter().enumerate() {
            if x != y && g != lambda {
                return None;
            }
        }
    }
    let lambda = lambda as usize;
    let p = BibdParams {
        v: t.v,
        b: t.b,
        k: t.k,
        r: t.r,
        lambda,
    };
    if p.r * (p.k - 1) != p.lambda * (p.v - 1) {
        return None;
    }
    bibd_identity_residual(&gram, &p).is_none().then_some(p)
}

/// First entry where `N Nᵀ − (r−λ) I − λ J` is nonzero.
pub fn bibd_identity_residual(gram: &[Vec<i64>], p: &BibdParams) -> Option<(usize, usize, i64)> {
    let (r, l) = (p.r as i64, p.lambda as i64);
    for (x, row) in gram.iter().enumerate() {
        for (y, &g) in row.iter().enumerate() {
            let expected = if x == y { r - l } else { 0 } + l;
            if g != expected {
                return Some((x, y, g - expected));
            }
        }
    }
    None
}

/// First entry where `N Nᵀ − (r−λ₁) I − (λ₁−λ₂) C − λ₂ J` is nonzero.
pub fn gdd_identity_residual(
    gram: &[Vec<i64>],
    classes: &ClassPartition,
    p: &GddParams,
) -> Option<(usize, usize, i64)> {
    let (r, l1, l2) = (p.r as i64, p.lambda1 as i64, p.lambda2 as i64);
    let c = classes.matrix();
    for (x, row) in gram.iter().enumerate() {
        for (y, &g) in row.iter().enumerate() {
            let id = (x == y) as i64;
            let expected = (r - l1) * id + (l1 - l2) * c[x][y] + l2;
            if g != expected {
                return Some((x, y, g - expected));
            }
        }
    }
    None
}

/// GDD check with respect to the given point classes.
///
/// When a pair type does not occur (`u = 1` or `m = 1`) its λ is reported
/// equal to the other one.
pub fn verify_gdd(inc: &IncidenceStructure, classes: &ClassPartition) -> Result<Option<GddParams>, DesignError> {
    if classes.points() != inc.points() {
        return Err(DesignError::ClassLength {
            expected: inc.points(),
            got: classes.points(),
        });
    }
    let Some(t) = verify_tactical(inc) else {
        return Ok(None);
    };
    if t.v < 2 || t.k < 2 {
        return Ok(None);
    }
    let gram = inc.gram();
    let mut same: Option<i64> = None;
    let mut cross: Option<i64> = None;
    for x in 0..t.v {
        for y in 0..t.v {
            if x == y {
                continue;
            }
            let slot = if classes.class_of(x) == classes.class_of(y) {
                &mut same
            } else {
                &mut cross
            };
            match *slot {
                None => *slot = Some(gram[x][y]),
                Some(l) if l != gram[x][y] => return Ok(None),
                _ => {}
            }
        }
    }
    let (l1, l2) = match (same, cross) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a, a),
        (None, Some(b)) => (b, b),
        (None, None) => return Ok(None),
    };
    let p = GddParams {
        v: t.v,
        b: t.b,
        k: t.k,
        r: t.r,
        u: classes.class_size(),
        m: classes.class_count(),
        lambda1: l1 as usize,
        lambda2: l2 as usize,
    };
    if !p.satisfies_relation() {
        return Ok(None);
    }
    Ok(gdd_identity_residual(&gram, classes, &p).is_none().then_some(p))
}

/// Most specific classification: BIBD, then GDD (if classes given), then tactical.
pub fn classify(inc: &IncidenceStructure, classes: Option<&ClassPartition>) -> Option<DesignParams> {
    if let Some(p) = verify_bibd(inc) {
        return Some(DesignParams::Bibd(p));
    }
    if let Some(c) = classes {
        if let Ok(Some(p)) = verify_gdd(inc, c) {
            return Some(DesignParams::Gdd(p));
        }
    }
    verify_tactical(inc).map(DesignParams::Tactical)
}

/// Family of incidence structures on a common `(X, S)` indexed by color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mosaic {
    colors: Vec<String>,
    members: Vec<IncidenceStructure>,
}

impl Mosaic {
    /// Checks only that members share dimensions; use [`verify_mosaic`] for the rest.
    pub fn new(colors: Vec<String>, members: Vec<IncidenceStructure>) -> Result<Self, DesignError> {
        let first = members.first().ok_or(DesignError::NoMembers)?;
        let (v, b) = (first.points(), first.blocks());
        for m in &members {
            if (m.points(), m.blocks()) != (v, b) {
                return Err(DesignError::DimensionMismatch(v, b, m.points(), m.blocks()));
            }
        }
        assert_eq!(colors.len(), members.len(), "one label per member");
        Ok(Self { colors, members })
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn members(&self) -> &[IncidenceStructure] {
        &self.members
    }

    pub fn color_count(&self) -> usize {
        self.members.len()
    }

    pub fn points(&self) -> usize {
        self.members[0].points()
    }

    pub fn seeds(&self) -> usize {
        self.members[0].blocks()
    }

    /// Functional form `f(s, x)`, available iff every cell is covered exactly once.
    pub fn functional_form(&self) -> Result<FunctionalForm, DesignError> {
        let (v, b) = (self.points(), self.seeds());
        let mut table = vec![0u32; v * b];
        for s in 0..b {
            for x in 0..v {
                let mut hit = None;
                let mut count = 0;
                for (c, m) in self.members.iter().enumerate() {
                    if m.get(x, s) {
                        hit = Some(c);
                        count += 1;
                    }
                }
                match (count, hit) {
                    (1, Some(c)) => table[s * v + x] = c as u32,
                    _ => return Err(DesignError::NotMosaic { x, s, count }),
                }
            }
        }
        Ok(FunctionalForm {
            points: v,
            seeds: b,
            colors: self.color_count(),
            table,
        })
    }
}

/// Tabulated `f : S × X → A` of a mosaic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalForm {
    points: usize,
    seeds: usize,
    colors: usize,
    table: Vec<u32>,
}

impl FunctionalForm {
    #[inline]
    pub fn eval(&self, s: usize, x: usize) -> usize {
        self.table[s * self.points + x] as usize
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn seeds(&self) -> usize {
        self.seeds
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    /// `{x : f(s, x) = α}` for every color α, ascending in `x`.
    pub fn preimages(&self, s: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.colors];
        for x in 0..self.points {
            out[self.eval(s, x)].push(x);
        }
        out
    }
}

/// Builds a mosaic by enumerating `f` over every `(s, x)`.
pub fn mosaic_from_function(
    points: usize,
    seeds: usize,
    colors: Vec<String>,
    f: impl Fn(usize, usize) -> usize,
) -> Result<Mosaic, DesignError> {
    let n = colors.len();
    let mut members = vec![IncidenceStructure::zeros(points, seeds); n];
    for s in 0..seeds {
        for x in 0..points {
            let c = f(s, x);
            if c >= n {
                return Err(DesignError::ColorOutOfRange { color: c, colors: n });
            }
            members[c].set(x, s, true);
        }
    }
    if let Some(c) = members.iter().position(IncidenceStructure::is_empty) {
        return Err(DesignError::EmptyMember(c));
    }
    Mosaic::new(colors, members)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MosaicReport {
    pub is_mosaic: bool,
    pub members_nonempty: bool,
    /// Keyed by color label in member order.
    pub member_params: Vec<(String, Option<DesignParams>)>,
}

impl MosaicReport {
    /// Parameters shared by every member, if they are all BIBDs with one tuple.
    pub fn common_bibd(&self) -> Option<BibdParams> {
        let mut it = self.member_params.iter().map(|(_, p)| match p {
            Some(DesignParams::Bibd(b)) => Some(*b),
            _ => None,
        });
        let first = it.next()??;
        it.all(|p| p == Some(first)).then_some(first)
    }

    /// One-line human verdict.
    pub fn verdict(&self) -> String {
        if !self.is_mosaic {
            return "not a mosaic".to_string();
        }
        if let Some(b) = self.common_bibd() {
            return format!("mosaic of ({},{},{}) BIBDs", b.v, b.k, b.lambda);
        }
        let all_gdd = self
            .member_params
            .iter()
            .all(|(_, p)| matches!(p, Some(DesignParams::Gdd(_)) | Some(DesignParams::Bibd(_))));
        if all_gdd {
            return "mosaic of GDDs".to_string();
        }
        if self.member_params.iter().all(|(_, p)| p.is_some()) {
            return "mosaic of tactical configurations".to_string();
        }
        "mosaic".to_string()
    }
}

/// `Σ_α N_α = J` check plus per-member classification (members in parallel).
pub fn verify_mosaic(mos: &Mosaic, classes: Option<&ClassPartition>) -> MosaicReport {
    let is_mosaic = mos.functional_form().is_ok();
    let members_nonempty = mos.members().iter().all(|m| !m.is_empty());
    let member_params = mos
        .members()
        .par_iter()
        .zip(mos.colors().par_iter())
        .map(|(m, c)| (c.clone(), classify(m, classes)))
        .collect();
    MosaicReport {
        is_mosaic: is_mosaic && members_nonempty,
        members_nonempty,
        member_params,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fano() -> IncidenceStructure {
        let lines = [
            [0, 1, 2],
            [0, 3, 4],
            [0, 5, 6],
            [1, 3, 5],
            [1, 4, 6],
            [2, 3, 6],
            [2, 4, 5],
        ];
        IncidenceStructure::from_fn(7, 7, |x, s| lines[s].contains(&x))
    }

    #[test]
    fn tactical_examples() {
        let ones = IncidenceStructure::new(4, 4, vec![1; 16]).unwrap();
        assert_eq!(verify_tactical(&ones), Some(TacticalParams { v: 4, b: 4, k: 4, r: 4 }));
        let id = IncidenceStructure::from_fn(3, 3, |x, s| x == s);
        assert_eq!(verify_tactical(&id), Some(TacticalParams { v: 3, b: 3, k: 1, r: 1 }));
        assert_eq!(
            verify_tactical(&fano()),
            Some(TacticalParams { v: 7, b: 7, k: 3, r: 3 })
        );
        assert_eq!(verify_tactical(&IncidenceStructure::zeros(2, 2)), None);
    }

    #[test]
    fn fano_is_a_bibd() {
        let p = verify_bibd(&fano()).unwrap();
        assert_eq!((p.v, p.k, p.lambda, p.r, p.b), (7, 3, 1, 3, 7));
        let g = fano().gram();
        for (x, row) in g.iter().enumerate() {
            for (y, &e) in row.iter().enumerate() {
                assert_eq!(e, if x == y { 3 } else { 1 });
            }
        }
    }

    #[test]
    fn degenerate_designs_are_not_bibds() {
        let id = IncidenceStructure::from_fn(3, 3, |x, s| x == s);
        assert_eq!(verify_bibd(&id), None);
        let single = IncidenceStructure::new(1, 2, vec![1, 1]).unwrap();
        assert_eq!(verify_bibd(&single), None);
    }

    #[test]
    fn bibd_is_gdd_with_equal_lambdas() {
        let classes = ClassPartition::new(&[0, 0, 0, 0, 0, 0, 0]).unwrap();
        let p = verify_gdd(&fano(), &classes).unwrap().unwrap();
        assert_eq!((p.lambda1, p.lambda2), (1, 1));
        let classes = ClassPartition::new(&[0, 1, 2, 3, 4, 5, 6]).unwrap();
        let p = verify_gdd(&fano(), &classes).unwrap().unwrap();
        assert_eq!((p.u, p.m, p.lambda1, p.lambda2), (1, 7, 1, 1));
    }

    #[test]
    fn transversal_gdd() {
        // classes {0,1}, {2,3}; blocks = all cross pairs
        let blocks = [[0, 2], [0, 3], [1, 2], [1, 3]];
        let inc = IncidenceStructure::from_fn(4, 4, |x, s| blocks[s].contains(&x));
        let classes = ClassPartition::new(&[0, 0, 1, 1]).unwrap();
        let p = verify_gdd(&inc, &classes).unwrap().unwrap();
        assert_eq!((p.u, p.m, p.k, p.lambda1, p.lambda2, p.r), (2, 2, 2, 0, 1, 2));
        assert_eq!(p.r * (p.k - 1), p.lambda1 * (p.u - 1) + p.lambda2 * (p.m - 1) * p.u);
        assert!(verify_bibd(&inc).is_none());
        assert!(matches!(classify(&inc, Some(&classes)), Some(DesignParams::Gdd(_))));
    }

    #[test]
    fn unequal_classes_rejected() {
        assert_eq!(ClassPartition::new(&[0, 0, 1]), Err(DesignError::UnequalClasses));
    }

    fn latin3() -> Mosaic {
        mosaic_from_function(3, 3, vec!["a".into(), "b".into(), "c".into()], |s, x| (s + x) % 3).unwrap()
    }

    #[test]
    fn latin_square_mosaic() {
        let rep = verify_mosaic(&latin3(), None);
        assert!(rep.is_mosaic);
        for (_, p) in &rep.member_params {
            assert_eq!(
                *p,
                Some(DesignParams::Tactical(TacticalParams { v: 3, b: 3, k: 1, r: 1 }))
            );
        }
        assert_eq!(rep.verdict(), "mosaic of tactical configurations");
    }

    #[test]
    fn zeroed_member_is_not_a_mosaic() {
        let mos = latin3();
        let mut members = mos.members().to_vec();
        members[1] = IncidenceStructure::zeros(3, 3);
        let broken = Mosaic::new(mos.colors().to_vec(), members).unwrap();
        let rep = verify_mosaic(&broken, None);
        assert!(!rep.is_mosaic);
        assert_eq!(rep.verdict(), "not a mosaic");
    }

    #[test]
    fn mismatched_members_rejected() {
        let r = Mosaic::new(
            vec!["a".into(), "b".into()],
            vec![IncidenceStructure::zeros(2, 2), IncidenceStructure::zeros(2, 3)],
        );
        assert!(matches!(r, Err(DesignError::DimensionMismatch(..))));
    }

    #[test]
    fn function_forms() {
        let constant = mosaic_from_function(3, 2, vec!["only".into()], |_, _| 0).unwrap();
        assert_eq!(
            constant.members()[0],
            IncidenceStructure::new(3, 2, vec![1; 6]).unwrap()
        );
        let ident = mosaic_from_function(3, 2, (0..3).map(|i| i.to_string()).collect(), |_, x| x).unwrap();
        for (c, m) in ident.members().iter().enumerate() {
            for x in 0..3 {
                assert_eq!(m.row(x), if x == c { &[1, 1][..] } else { &[0, 0][..] });
            }
        }
        let missing = mosaic_from_function(2, 2, vec!["a".into(), "b".into()], |_, _| 0);
        assert_eq!(missing, Err(DesignError::EmptyMember(1)));
        let out_of_range = mosaic_from_function(2, 2, vec!["a".into()], |_, x| x);
        assert!(matches!(out_of_range, Err(DesignError::ColorOutOfRange { .. })));
    }
}
