//! Hereditary classes, canonical forms and isomorph-free generation.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::morphisms::{
    find_embeddings, is_homogeneous_with, is_isomorphic, MorphismError, PartialMap, SearchConfig,
};
use crate::pg::projective_plane;
use crate::space::{named, Dense, Line, LinearSpace, Point};

/// Largest space accepted by [`canonical_form`].
pub const CANONICAL_MAX_POINTS: usize = 13;
pub const CANONICAL_NODE_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error("unknown class '{0}' (expected all, dN or d4star)")]
    UnknownClass(String),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    All,
    Degree,
    P4Star,
}

/// A hereditary class of finite linear spaces: an optional degree bound
/// and a list of forbidden induced subspaces.
#[derive(Debug, Clone, Serialize)]
pub struct ClassSpec {
    pub kind: ClassKind,
    pub max_degree: Option<usize>,
    #[serde(skip)]
    pub exclusions: Vec<LinearSpace>,
}

impl ClassSpec {
    pub fn all() -> Self {
        ClassSpec {
            kind: ClassKind::All,
            max_degree: None,
            exclusions: Vec::new(),
        }
    }

    /// Spaces of degree at most `n`.
    pub fn degree(n: usize) -> Self {
        ClassSpec {
            kind: ClassKind::Degree,
            max_degree: Some(n),
            exclusions: Vec::new(),
        }
    }

    pub fn p3() -> Self {
        Self::degree(3)
    }

    /// Degree at most 4, with no induced Fano plane and no induced pentagon.
    pub fn p4star() -> Self {
        ClassSpec {
            kind: ClassKind::P4Star,
            max_degree: Some(4),
            exclusions: vec![named::fano(), named::pentagon()],
        }
    }

    pub fn parse(s: &str) -> Result<Self, EnumerateError> {
        match s {
            "all" => Ok(Self::all()),
            "d4star" | "p4star" | "p4*" => Ok(Self::p4star()),
            _ => s
                .strip_prefix('d')
                .or_else(|| s.strip_prefix('p'))
                .and_then(|d| d.parse().ok())
                .map(Self::degree)
                .ok_or_else(|| EnumerateError::UnknownClass(s.to_string())),
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            ClassKind::All => "all".into(),
            ClassKind::P4Star => "d4star".into(),
            ClassKind::Degree => format!("d{}", self.max_degree.unwrap_or(0)),
        }
    }

    pub fn contains(&self, s: &LinearSpace) -> bool {
        if let Some(d) = self.max_degree {
            if s.degree() > d {
                return false;
            }
        }
        self.exclusions
            .iter()
            .all(|x| x.n_points() > s.n_points() || find_embeddings(x, s, 1).is_empty())
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Iterated degree-profile refinement; returns a cell index per point,
/// cells numbered in increasing invariant order.
type CellKey = (usize, Vec<(usize, Vec<usize>)>);

fn refine(d: &Dense) -> Vec<usize> {
    let n = d.n;
    let mut cell: Vec<usize> = vec![0; n];
    let mut count = if n == 0 { 0 } else { 1 };
    loop {
        let keys: Vec<CellKey> = (0..n)
            .map(|p| {
                let mut ls: Vec<(usize, Vec<usize>)> = d.point_lines[p]
                    .iter()
                    .map(|&l| {
                        let line = &d.lines[l as usize];
                        let mut cs: Vec<usize> =
                            line.iter().filter(|&&q| q != p).map(|&q| cell[q]).collect();
                        cs.sort_unstable();
                        (line.len(), cs)
                    })
                    .collect();
                ls.sort_unstable();
                (cell[p], ls)
            })
            .collect();
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let next: Vec<usize> = keys
            .iter()
            .map(|k| distinct.binary_search(k).unwrap())
            .collect();
        let done = distinct.len() == count;
        cell = next;
        count = distinct.len();
        if done {
            return cell;
        }
    }
}

/// Twin classes: points `x`, `y` are twins when swapping them is an
/// automorphism.
fn twin_classes(s: &LinearSpace) -> Vec<usize> {
    let n = s.n_points();
    let sig: Vec<Vec<Line>> = (0..n)
        .map(|p| {
            s.lines_through(p)
                .iter()
                .map(|&li| {
                    s.lines()[li as usize]
                        .iter()
                        .copied()
                        .filter(|&q| q != p)
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut class: Vec<usize> = (0..n).collect();
    for x in 0..n {
        if class[x] != x {
            continue;
        }
        for y in x + 1..n {
            if class[y] != y {
                continue;
            }
            // swapping x and y fixes every line through neither
            let swap = |l: &Line| -> Line {
                let mut v: Line = l
                    .iter()
                    .map(|&q| {
                        if q == x {
                            y
                        } else if q == y {
                            x
                        } else {
                            q
                        }
                    })
                    .collect();
                v.sort_unstable();
                v
            };
            let sx: std::collections::BTreeSet<Line> = sig[x].iter().map(swap).collect();
            let sy: std::collections::BTreeSet<Line> = sig[y].iter().cloned().collect();
            if sx == sy {
                class[y] = x;
            }
        }
    }
    class
}

struct Canon<'a> {
    d: &'a Dense,
    slots: Vec<usize>,
    twin: Vec<usize>,
    label: Vec<Point>,
    used: Vec<bool>,
    best: Vec<u128>,
    best_label: Vec<Point>,
    nodes: u64,
    cell: Vec<usize>,
}

impl Canon<'_> {
    fn block(&self, k: usize, p: Point) -> u128 {
        let mut b: u128 = 0;
        for i in 0..k {
            for j in i + 1..k {
                b <<= 1;
                if self.d.collinear(self.label[i], self.label[j], p) {
                    b |= 1;
                }
            }
        }
        b
    }

    fn search(&mut self, k: usize) -> Result<(), EnumerateError> {
        self.nodes += 1;
        if self.nodes > CANONICAL_NODE_BUDGET {
            return Err(EnumerateError::SearchBudgetExceeded(format!(
                "canonical form exceeded {CANONICAL_NODE_BUDGET} nodes"
            )));
        }
        let n = self.d.n;
        if k == n {
            self.best_label = self.label.clone();
            return Ok(());
        }
        let cell = self.slots[k];
        let mut tried: Vec<usize> = Vec::new();
        for p in 0..n {
            if self.used[p] || self.cell[p] != cell || tried.contains(&self.twin[p]) {
                continue;
            }
            tried.push(self.twin[p]);
            let b = self.block(k, p);
            if self.best.len() > k {
                if b < self.best[k] {
                    continue;
                }
                if b > self.best[k] {
                    self.best.truncate(k);
                    self.best.push(b);
                }
            } else {
                self.best.push(b);
            }
            self.used[p] = true;
            self.label[k] = p;
            self.search(k + 1)?;
            self.used[p] = false;
        }
        Ok(())
    }
}

/// Canonical byte encoding: equal for two spaces iff they are isomorphic.
///
/// Points are first split into cells by an iterated invariant refinement.
/// Among labelings that list the cells in order, the one maximizing the
/// sequence of collinearity blocks (block `k` records which earlier pairs
/// are collinear with the `k`-th point) is chosen by branch and bound, with
/// twin points explored once. The encoding is the relabelled space.
pub fn canonical_form(a: &LinearSpace) -> Result<Vec<u8>, EnumerateError> {
    canonical_labelling(a).map(|(bytes, _)| bytes)
}

/// [`canonical_form`] together with the canonical relabelling of `a`.
pub fn canonical_labelling(a: &LinearSpace) -> Result<(Vec<u8>, LinearSpace), EnumerateError> {
    let n = a.n_points();
    if n > CANONICAL_MAX_POINTS {
        return Err(EnumerateError::SearchBudgetExceeded(format!(
            "canonical form supports at most {CANONICAL_MAX_POINTS} points, got {n}"
        )));
    }
    let d = Dense::new(a);
    let cell = refine(&d);
    let mut slots: Vec<usize> = cell.clone();
    slots.sort_unstable();
    let mut c = Canon {
        d: &d,
        slots,
        twin: twin_classes(a),
        label: vec![0; n],
        used: vec![false; n],
        best: Vec::new(),
        best_label: Vec::new(),
        nodes: 0,
        cell,
    };
    c.search(0)?;
    let mut perm = vec![0; n];
    for (new, &old) in c.best_label.iter().enumerate() {
        perm[old] = new;
    }
    let canon = a.permuted(&perm);
    Ok((encode(&canon), canon))
}

fn encode(s: &LinearSpace) -> Vec<u8> {
    let mut out = vec![s.n_points() as u8];
    for l in s.lines() {
        out.push(l.len() as u8);
        out.extend(l.iter().map(|&p| p as u8));
    }
    out
}

/// All one-point extensions of `a` whose degree stays within `max_degree`,
/// as (family of extended lines, extension). The new point is `n_points()`
/// and lies on the given pairwise disjoint lines of `a`. Families are
/// listed in lexicographic order of line indices into `all_lines`.
pub fn one_point_extensions(
    a: &LinearSpace,
    max_degree: Option<usize>,
) -> Vec<(Vec<Line>, LinearSpace)> {
    let all = a.all_lines();
    let n = a.n_points();
    let deg: Vec<usize> = (0..n).map(|p| a.point_degree(p)).collect();
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut covered = vec![false; n];
    extend_families(
        &all,
        &deg,
        max_degree,
        0,
        &mut chosen,
        &mut covered,
        &mut |fam: &[usize]| {
            let lines: Vec<Line> = fam.iter().map(|&i| all[i].clone()).collect();
            let refs: Vec<&[Point]> = lines.iter().map(Vec::as_slice).collect();
            let ext = a.with_point_on(&refs);
            out.push((lines, ext));
        },
    );
    out
}

fn extend_families(
    all: &[Line],
    deg: &[usize],
    max_degree: Option<usize>,
    from: usize,
    chosen: &mut Vec<usize>,
    covered: &mut Vec<bool>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let n = deg.len();
    let ok = match max_degree {
        None => true,
        Some(d) => {
            let n_cov = covered.iter().filter(|&&c| c).count();
            let new_deg = chosen.len() + (n - n_cov);
            // uncovered points gain a trivial line to the new point
            new_deg <= d && (0..n).all(|p| covered[p] || deg[p] < d)
        }
    };
    if ok {
        emit(chosen);
    }
    for i in from..all.len() {
        let l = &all[i];
        if l.iter().any(|&p| covered[p]) {
            continue;
        }
        if let Some(d) = max_degree {
            if l.len() + 1 > d {
                continue;
            }
        }
        for &p in l {
            covered[p] = true;
        }
        chosen.push(i);
        extend_families(all, deg, max_degree, i + 1, chosen, covered, emit);
        chosen.pop();
        for &p in l {
            covered[p] = false;
        }
    }
}

/// One representative per isomorphism class of `n`-point spaces in the
/// class, in canonical order. The class must be hereditary.
///
/// Generation is level-wise: the canonical representatives on `k` points
/// are extended by one point in every admissible way and deduplicated by
/// canonical form.
pub fn enumerate_spaces(n: usize, class: &ClassSpec) -> Result<Vec<LinearSpace>, EnumerateError> {
    Ok(enumerate_levels(n, class)?.pop().unwrap_or_default())
}

/// Representatives on `0..=n` points, one list per point count.
pub fn enumerate_levels(
    n: usize,
    class: &ClassSpec,
) -> Result<Vec<Vec<LinearSpace>>, EnumerateError> {
    let limit = if class.max_degree.is_some() { 13 } else { 9 };
    if n > limit {
        return Err(EnumerateError::SearchBudgetExceeded(format!(
            "enumeration for class {class} is limited to {limit} points"
        )));
    }
    let mut levels = vec![vec![LinearSpace::trivial(0)]];
    for _ in 0..n {
        let prev = levels.last().unwrap();
        let mut next: BTreeMap<Vec<u8>, LinearSpace> = BTreeMap::new();
        for s in prev {
            for (_, ext) in one_point_extensions(s, class.max_degree) {
                if !class.exclusions.is_empty() && !class.contains(&ext) {
                    continue;
                }
                let (key, canon) = canonical_labelling(&ext)?;
                next.entry(key).or_insert(canon);
            }
        }
        levels.push(next.into_values().collect());
    }
    Ok(levels)
}

/// No one-point extension of `a` lies in the class, hence (the class being
/// hereditary) no larger member contains a copy of `a`.
pub fn is_maximal_in_class(a: &LinearSpace, class: &ClassSpec, max_points: usize) -> bool {
    if max_points <= a.n_points() {
        return true;
    }
    one_point_extensions(a, class.max_degree)
        .into_iter()
        .all(|(_, e)| !class.contains(&e))
}

/// Same question answered by enumerating all members with more points
/// (up to `max_points`) and searching for embeddings of `a` into them.
pub fn is_maximal_in_class_by_enumeration(
    a: &LinearSpace,
    class: &ClassSpec,
    max_points: usize,
) -> Result<bool, EnumerateError> {
    for m in a.n_points() + 1..=max_points {
        for s in enumerate_spaces(m, class)? {
            if !find_embeddings(a, &s, 1).is_empty() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HomogeneousTag {
    /// Trivial space on at least three points.
    T,
    /// A single line (including spaces on at most two points).
    L,
    P2,
    P3,
    Other,
}

impl fmt::Display for HomogeneousTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HomogeneousTag::T => "T",
            HomogeneousTag::L => "L",
            HomogeneousTag::P2 => "P2",
            HomogeneousTag::P3 => "P3",
            HomogeneousTag::Other => "OTHER",
        })
    }
}

pub fn tag_of(s: &LinearSpace) -> HomogeneousTag {
    let n = s.n_points();
    if n <= 2 || s.lines().iter().any(|l| l.len() == n) {
        HomogeneousTag::L
    } else if s.is_trivial() {
        HomogeneousTag::T
    } else if n == 7 && is_isomorphic(s, &named::fano()).is_some() {
        HomogeneousTag::P2
    } else if n == 13 && is_isomorphic(s, &projective_plane(3).unwrap()).is_some() {
        HomogeneousTag::P3
    } else {
        HomogeneousTag::Other
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classified {
    pub space: LinearSpace,
    pub homogeneous: bool,
    pub tag: Option<HomogeneousTag>,
    pub witness: Option<PartialMap>,
}

/// Homogeneity verdict for every space on `1..=max_points` points.
pub fn classify_homogeneous(max_points: usize) -> Result<Vec<Classified>, EnumerateError> {
    let levels = enumerate_levels(max_points, &ClassSpec::all())?;
    let mut out = Vec::new();
    for level in levels.into_iter().skip(1) {
        for s in level {
            out.push(classify_one(s)?);
        }
    }
    Ok(out)
}

pub fn classify_one(space: LinearSpace) -> Result<Classified, EnumerateError> {
    let r = is_homogeneous_with(&space, &SearchConfig::default())?;
    let tag = r.homogeneous.then(|| tag_of(&space));
    Ok(Classified {
        space,
        homogeneous: r.homogeneous,
        tag,
        witness: r.witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use named::*;

    #[test]
    fn canonical_invariance() {
        let f = fano();
        let g = f.permuted(&[3, 6, 0, 1, 5, 2, 4]);
        assert_ne!(f, g);
        assert_eq!(canonical_form(&f).unwrap(), canonical_form(&g).unwrap());
        assert_ne!(
            canonical_form(&f).unwrap(),
            canonical_form(&projective_plane(3).unwrap()).unwrap()
        );
        assert_ne!(
            canonical_form(&line(3)).unwrap(),
            canonical_form(&triangle()).unwrap()
        );
        assert!(canonical_form(&LinearSpace::trivial(14)).is_err());
    }

    #[test]
    fn small_counts() {
        let all = ClassSpec::all();
        let counts: Vec<usize> = enumerate_levels(7, &all)
            .unwrap()
            .iter()
            .map(Vec::len)
            .collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 5, 10, 24]);
    }

    #[test]
    fn degree_three_seven_points_contains_fano() {
        let spaces = enumerate_spaces(7, &ClassSpec::p3()).unwrap();
        assert!(spaces.iter().any(|s| is_isomorphic(s, &fano()).is_some()));
        for s in &spaces {
            assert!(!find_embeddings(s, &fano(), 1).is_empty());
        }
    }

    #[test]
    fn class_membership() {
        let p4 = ClassSpec::p4star();
        assert!(!p4.contains(&pentagon()));
        assert!(!p4.contains(&fano()));
        assert!(p4.contains(&projective_plane(3).unwrap()));
        assert!(p4.contains(&quadrilateral()));
        assert!(!ClassSpec::p3().contains(&pentagon()));
        assert_eq!(ClassSpec::parse("d3").unwrap().max_degree, Some(3));
        assert!(ClassSpec::parse("bogus").is_err());
    }

    #[test]
    fn maximality() {
        assert!(is_maximal_in_class(&fano(), &ClassSpec::p3(), 9));
        assert!(is_maximal_in_class(
            &projective_plane(3).unwrap(),
            &ClassSpec::p4star(),
            14
        ));
        assert!(!is_maximal_in_class(&triangle(), &ClassSpec::p3(), 7));
        assert!(!is_maximal_in_class_by_enumeration(&triangle(), &ClassSpec::p3(), 7).unwrap());
        assert!(is_maximal_in_class_by_enumeration(&fano(), &ClassSpec::p3(), 9).unwrap());
    }

    #[test]
    fn extension_degree_pruning_matches_filter() {
        for s in enumerate_spaces(5, &ClassSpec::all()).unwrap() {
            for d in 2..5 {
                let pruned = one_point_extensions(&s, Some(d)).len();
                let filtered = one_point_extensions(&s, None)
                    .into_iter()
                    .filter(|(_, e)| e.degree() <= d)
                    .count();
                assert_eq!(pruned, filtered);
            }
        }
    }
}
