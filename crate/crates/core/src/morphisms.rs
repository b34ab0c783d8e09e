//! Partial isomorphisms, embedding and automorphism search, homogeneity.
//!
//! All searches share one backtracking engine. A partial injection of
//! points is a partial isomorphism exactly when the induced map on lines
//! (each line meeting the domain in at least two points goes to the line
//! through the images of those points) is well defined and injective, so
//! the engine maintains that line map incrementally and undoes it on
//! backtrack.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::space::{Dense, LinearSpace, Point};

const UNSET: u32 = u32::MAX;
const FREE: usize = usize::MAX;

pub const DEFAULT_NODE_BUDGET: u64 = 200_000_000;
pub const DEFAULT_MAX_POINTS: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("malformed map: {0}")]
    MalformedMap(String),
    #[error("map is not a partial isomorphism")]
    NotPartialIsomorphism,
    #[error("search budget of {budget} nodes exceeded")]
    SearchBudgetExceeded { budget: u64 },
    #[error("space has {n_points} points, above the configured bound of {bound}")]
    SpaceTooLarge { n_points: usize, bound: usize },
    #[error("not a projective plane")]
    NotProjectivePlane,
    #[error("plane has degree {degree}; a degree above 4 is required")]
    DegreeTooSmall { degree: usize },
}

/// Limits for the exhaustive searches.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub node_budget: u64,
    pub max_points: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            node_budget: DEFAULT_NODE_BUDGET,
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

/// A finite partial map between point sets, as `(source, image)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PartialMap {
    pub pairs: Vec<(Point, Point)>,
}

impl PartialMap {
    pub fn new(mut pairs: Vec<(Point, Point)>) -> Self {
        pairs.sort_unstable();
        PartialMap { pairs }
    }

    pub fn identity(points: &[Point]) -> Self {
        Self::new(points.iter().map(|&p| (p, p)).collect())
    }

    /// Restriction of a total map `img` (indexed by source point) to `domain`.
    pub fn from_images(domain: &[Point], img: &[Point]) -> Self {
        Self::new(domain.iter().map(|&p| (p, img[p])).collect())
    }

    pub fn domain(&self) -> Vec<Point> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks range, functionality and injectivity.
    pub fn check_well_formed(&self, n_src: usize, n_dst: usize) -> Result<(), MorphismError> {
        let mut srcs = HashSet::new();
        let mut dsts = HashSet::new();
        for &(x, y) in &self.pairs {
            if x >= n_src {
                return Err(MorphismError::MalformedMap(format!(
                    "source point {x} out of range"
                )));
            }
            if y >= n_dst {
                return Err(MorphismError::MalformedMap(format!(
                    "image point {y} out of range"
                )));
            }
            if !srcs.insert(x) {
                return Err(MorphismError::MalformedMap(format!(
                    "point {x} mapped twice"
                )));
            }
            if !dsts.insert(y) {
                return Err(MorphismError::MalformedMap(format!(
                    "point {y} is the image of two points"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for PartialMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, (x, y)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}->{y}")?;
        }
        write!(f, "}}")
    }
}

/// Collinearity on the domain is preserved and reflected.
pub fn is_partial_isomorphism(
    src: &LinearSpace,
    dst: &LinearSpace,
    m: &PartialMap,
) -> Result<bool, MorphismError> {
    m.check_well_formed(src.n_points(), dst.n_points())?;
    let p = &m.pairs;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            for k in j + 1..p.len() {
                let a = src.collinear_unchecked(p[i].0, p[j].0, p[k].0);
                let b = dst.collinear_unchecked(p[i].1, p[j].1, p[k].1);
                if a != b {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Backtracking matcher from `a` into `b`.
pub(crate) struct Matcher<'a> {
    a: &'a Dense,
    b: &'a Dense,
    order: Vec<Point>,
    n_fixed: usize,
    compat: Vec<bool>,
    map: Vec<usize>,
    used: Vec<bool>,
    lmap: Vec<u32>,
    lown: Vec<u32>,
    log: Vec<u32>,
    nodes: u64,
    budget: u64,
    feasible: bool,
}

/// Whether a sorted-descending profile dominates another entrywise.
fn dominates(big: &[usize], small: &[usize]) -> bool {
    big.len() >= small.len() && big.iter().zip(small).all(|(b, s)| b >= s)
}

impl<'a> Matcher<'a> {
    pub fn new(
        a: &'a Dense,
        b: &'a Dense,
        bijective: bool,
        fixed: &[(Point, Point)],
        budget: u64,
    ) -> Self {
        let (na, nb) = (a.n, b.n);
        let pa: Vec<Vec<usize>> = (0..na).map(|p| a.profile(p)).collect();
        let pb: Vec<Vec<usize>> = (0..nb).map(|p| b.profile(p)).collect();
        let mut compat = vec![false; na * nb];
        for x in 0..na {
            for y in 0..nb {
                compat[x * nb + y] = if bijective {
                    pa[x] == pb[y]
                } else {
                    dominates(&pb[y], &pa[x])
                };
            }
        }
        let mut feasible = !bijective || (na == nb && a.lines.len() == b.lines.len());
        if !bijective && na > nb {
            feasible = false;
        }

        let mut order: Vec<Point> = Vec::with_capacity(na);
        let mut placed = vec![false; na];
        for &(x, _) in fixed {
            if !placed[x] {
                placed[x] = true;
                order.push(x);
            }
        }
        // score = number of already-ordered points sharing a nontrivial line
        let mut score = vec![0usize; na];
        let bump = |p: Point, score: &mut Vec<usize>, placed: &Vec<bool>| {
            for &l in &a.point_lines[p] {
                let line = &a.lines[l as usize];
                if line.len() >= 3 {
                    for &q in line {
                        if !placed[q] {
                            score[q] += 1;
                        }
                    }
                }
            }
        };
        for &p in &order.clone() {
            bump(p, &mut score, &placed);
        }
        while order.len() < na {
            let next = (0..na)
                .filter(|&p| !placed[p])
                .max_by(|&x, &y| {
                    (score[x], a.degree(x))
                        .cmp(&(score[y], a.degree(y)))
                        .then(y.cmp(&x))
                })
                .unwrap();
            placed[next] = true;
            order.push(next);
            bump(next, &mut score, &placed);
        }

        let mut m = Matcher {
            a,
            b,
            order,
            n_fixed: 0,
            compat,
            map: vec![FREE; na],
            used: vec![false; nb],
            lmap: vec![UNSET; a.lines.len()],
            lown: vec![UNSET; b.lines.len()],
            log: Vec::new(),
            nodes: 0,
            budget,
            feasible,
        };
        if m.feasible {
            for (depth, &(x, y)) in fixed.iter().enumerate() {
                if m.map[x] != FREE {
                    if m.map[x] != y {
                        m.feasible = false;
                    }
                    continue;
                }
                if y >= nb || m.used[y] || !m.compat[x * nb + y] || !m.assign(depth, x, y) {
                    m.feasible = false;
                    break;
                }
            }
            m.n_fixed = fixed.iter().map(|p| p.0).collect::<HashSet<_>>().len();
        }
        m
    }

    /// Tries `p -> q` with `order[..depth]` already assigned.
    fn assign(&mut self, depth: usize, p: Point, q: Point) -> bool {
        let mark = self.log.len();
        for i in 0..depth {
            let x = self.order[i];
            let la = self.a.line(p, x);
            let lb = self.b.line(q, self.map[x]);
            let cur = self.lmap[la as usize];
            if cur == UNSET {
                if self.lown[lb as usize] != UNSET {
                    self.undo(mark);
                    return false;
                }
                self.lmap[la as usize] = lb;
                self.lown[lb as usize] = la;
                self.log.push(la);
            } else if cur != lb {
                self.undo(mark);
                return false;
            }
        }
        self.map[p] = q;
        self.used[q] = true;
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.log.len() > mark {
            let la = self.log.pop().unwrap();
            let lb = self.lmap[la as usize];
            self.lown[lb as usize] = UNSET;
            self.lmap[la as usize] = UNSET;
        }
    }

    /// Runs the search, calling `visit` on each complete map until it
    /// returns false.
    pub fn run(&mut self, visit: &mut dyn FnMut(&[Point]) -> bool) -> Result<(), MorphismError> {
        if !self.feasible {
            return Ok(());
        }
        let start = self.n_fixed;
        self.recurse(start, visit).map(|_| ())
    }

    fn recurse(
        &mut self,
        depth: usize,
        visit: &mut dyn FnMut(&[Point]) -> bool,
    ) -> Result<bool, MorphismError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(MorphismError::SearchBudgetExceeded {
                budget: self.budget,
            });
        }
        if depth == self.order.len() {
            return Ok(visit(&self.map));
        }
        let p = self.order[depth];
        let nb = self.b.n;
        // if a line through p is already mapped, the image lies on its image
        let mut pool: Option<u32> = None;
        for &l in &self.a.point_lines[p] {
            let t = self.lmap[l as usize];
            if t != UNSET {
                let better = match pool {
                    None => true,
                    Some(c) => self.b.lines[t as usize].len() < self.b.lines[c as usize].len(),
                };
                if better {
                    pool = Some(t);
                }
            }
        }
        let candidates: Vec<Point> = match pool {
            Some(l) => self.b.lines[l as usize].clone(),
            None => (0..nb).collect(),
        };
        for q in candidates {
            if self.used[q] || !self.compat[p * nb + q] {
                continue;
            }
            let mark = self.log.len();
            if self.assign(depth, p, q) {
                let go_on = self.recurse(depth + 1, visit)?;
                self.map[p] = FREE;
                self.used[q] = false;
                self.undo(mark);
                if !go_on {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Up to `limit` embeddings of `a` into `b`, each as the image vector
/// indexed by the points of `a`. Complete when fewer than `limit` are found.
pub fn find_embeddings(a: &LinearSpace, b: &LinearSpace, limit: usize) -> Vec<Vec<Point>> {
    find_embeddings_with(a, b, limit, &[], &SearchConfig::default())
        .expect("embedding search exceeded the default budget")
}

/// [`find_embeddings`] with preassigned pairs and explicit limits.
pub fn find_embeddings_with(
    a: &LinearSpace,
    b: &LinearSpace,
    limit: usize,
    fixed: &[(Point, Point)],
    cfg: &SearchConfig,
) -> Result<Vec<Vec<Point>>, MorphismError> {
    let (da, db) = (Dense::new(a), Dense::new(b));
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    let mut m = Matcher::new(&da, &db, false, fixed, cfg.node_budget);
    m.run(&mut |img| {
        out.push(img.to_vec());
        out.len() < limit
    })?;
    Ok(out)
}

/// Counts all embeddings of `a` into `b`.
pub fn count_embeddings(
    a: &LinearSpace,
    b: &LinearSpace,
    cfg: &SearchConfig,
) -> Result<usize, MorphismError> {
    let (da, db) = (Dense::new(a), Dense::new(b));
    let mut count = 0;
    Matcher::new(&da, &db, false, &[], cfg.node_budget).run(&mut |_| {
        count += 1;
        true
    })?;
    Ok(count)
}

/// An isomorphism `a -> b` (as an image vector), if one exists.
pub fn is_isomorphic(a: &LinearSpace, b: &LinearSpace) -> Option<Vec<Point>> {
    if a.n_points() != b.n_points() || a.lines().len() != b.lines().len() {
        return None;
    }
    let (da, db) = (Dense::new(a), Dense::new(b));
    let mut found = None;
    Matcher::new(&da, &db, true, &[], u64::MAX)
        .run(&mut |img| {
            found = Some(img.to_vec());
            false
        })
        .ok()?;
    found
}

/// The full automorphism group, sorted lexicographically.
pub fn automorphisms(a: &LinearSpace) -> Result<Vec<Vec<Point>>, MorphismError> {
    automorphisms_with(a, &SearchConfig::default())
}

pub fn automorphisms_with(
    a: &LinearSpace,
    cfg: &SearchConfig,
) -> Result<Vec<Vec<Point>>, MorphismError> {
    if a.n_points() > cfg.max_points {
        return Err(MorphismError::SpaceTooLarge {
            n_points: a.n_points(),
            bound: cfg.max_points,
        });
    }
    let d = Dense::new(a);
    let mut out = Vec::new();
    Matcher::new(&d, &d, true, &[], cfg.node_budget).run(&mut |img| {
        out.push(img.to_vec());
        true
    })?;
    out.sort_unstable();
    Ok(out)
}

/// An automorphism of `space` extending `m`, if any.
pub fn extend_to_automorphism(
    space: &LinearSpace,
    m: &PartialMap,
) -> Result<Option<Vec<Point>>, MorphismError> {
    extend_to_automorphism_with(space, m, &SearchConfig::default())
}

pub fn extend_to_automorphism_with(
    space: &LinearSpace,
    m: &PartialMap,
    cfg: &SearchConfig,
) -> Result<Option<Vec<Point>>, MorphismError> {
    if !is_partial_isomorphism(space, space, m)? {
        return Err(MorphismError::NotPartialIsomorphism);
    }
    let d = Dense::new(space);
    let mut found = None;
    Matcher::new(&d, &d, true, &m.pairs, cfg.node_budget).run(&mut |img| {
        found = Some(img.to_vec());
        false
    })?;
    Ok(found)
}

/// Outcome of [`is_homogeneous`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomogeneityReport {
    pub homogeneous: bool,
    /// A partial isomorphism with no automorphism extension, minimal by
    /// domain size, then domain, then image (lexicographically).
    pub witness: Option<PartialMap>,
    pub automorphism_count: usize,
    /// Orbit representatives of domains that were checked.
    pub domains_checked: usize,
}

/// Calls `f` on each `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[Point]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        i -= 1;
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn mask_of(points: impl IntoIterator<Item = Point>) -> u64 {
    points.into_iter().fold(0u64, |m, p| m | (1u64 << p))
}

/// Decides homogeneity: every partial isomorphism between finite subsets
/// extends to an automorphism.
///
/// Domains are taken up to the automorphism group: for each size, only the
/// lexicographically first subset of each orbit is examined, and there the
/// embeddings of the induced subspace are compared with restrictions of
/// automorphisms.
pub fn is_homogeneous(a: &LinearSpace) -> Result<HomogeneityReport, MorphismError> {
    is_homogeneous_with(a, &SearchConfig::default())
}

pub fn is_homogeneous_with(
    a: &LinearSpace,
    cfg: &SearchConfig,
) -> Result<HomogeneityReport, MorphismError> {
    let n = a.n_points();
    let aut = automorphisms_with(a, cfg)?;
    let mut report = HomogeneityReport {
        homogeneous: true,
        witness: None,
        automorphism_count: aut.len(),
        domains_checked: 0,
    };
    let target = Dense::new(a);
    for k in 1..=n {
        let mut seen: HashSet<u64> = HashSet::new();
        let mut failure: Option<Result<PartialMap, MorphismError>> = None;
        for_each_subset(n, k, &mut |d| {
            let mask = mask_of(d.iter().copied());
            if seen.contains(&mask) {
                return true;
            }
            for s in &aut {
                seen.insert(mask_of(d.iter().map(|&p| s[p])));
            }
            report.domains_checked += 1;
            match check_domain(a, &target, d, &aut, cfg) {
                Ok(None) => true,
                Ok(Some(w)) => {
                    failure = Some(Ok(w));
                    false
                }
                Err(e) => {
                    failure = Some(Err(e));
                    false
                }
            }
        });
        if let Some(f) = failure {
            report.homogeneous = false;
            report.witness = Some(f?);
            return Ok(report);
        }
    }
    Ok(report)
}

/// Least non-extendable partial isomorphism with domain `d`, if any.
fn check_domain(
    a: &LinearSpace,
    target: &Dense,
    d: &[Point],
    aut: &[Vec<Point>],
    cfg: &SearchConfig,
) -> Result<Option<PartialMap>, MorphismError> {
    let restrictions: HashSet<Vec<Point>> = aut
        .iter()
        .map(|s| d.iter().map(|&p| s[p]).collect())
        .collect();
    let sub = Dense::new(&a.induced(d));
    let mut count = 0usize;
    Matcher::new(&sub, target, false, &[], cfg.node_budget).run(&mut |_| {
        count += 1;
        true
    })?;
    if count == restrictions.len() {
        return Ok(None);
    }
    let mut images = Vec::with_capacity(count);
    Matcher::new(&sub, target, false, &[], cfg.node_budget).run(&mut |img| {
        if !restrictions.contains(img) {
            images.push(img.to_vec());
        }
        true
    })?;
    let img = images
        .into_iter()
        .min()
        .expect("count exceeds restriction count");
    Ok(Some(PartialMap::new(
        d.iter().zip(img).map(|(&p, q)| (p, q)).collect(),
    )))
}

/// The configuration used to show a plane of degree above 4 is not
/// homogeneous.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deg5Witness {
    pub horizon: Vec<Point>,
    pub s: Point,
    pub t: Point,
    /// Three lines through `s` other than the horizon.
    pub l: [Vec<Point>; 3],
    /// Two lines through `t` other than the horizon.
    pub k: [Vec<Point>; 2],
    /// `x[i][j]` is the meet of `l[i]` and `k[j]`.
    pub x: [[Point; 2]; 3],
    pub y: Point,
    /// Fixes the six points `x[i][j]` except `x[0][0]`, which goes to `y`.
    pub map: PartialMap,
}

/// Builds the six-point partial isomorphism with no automorphism
/// extension in a projective plane of degree at least 5.
///
/// Every choice is the first available in canonical order: the horizon is
/// the first line, `s` and `t` its two smallest points, and the lines
/// through them are taken in line order.
pub fn nonhomogeneity_witness_deg5(p: &LinearSpace) -> Result<Deg5Witness, MorphismError> {
    let shape = p.classify_shape();
    if !shape.is_projective_plane {
        return Err(MorphismError::NotProjectivePlane);
    }
    if shape.degree <= 4 {
        return Err(MorphismError::DegreeTooSmall {
            degree: shape.degree,
        });
    }
    let lines = p.lines();
    let horizon = lines[0].clone();
    let (s, t) = (horizon[0], horizon[1]);
    let through = |x: Point, take: usize| -> Vec<Vec<Point>> {
        p.lines_through(x)
            .iter()
            .map(|&li| lines[li as usize].clone())
            .filter(|l| *l != horizon)
            .take(take)
            .collect()
    };
    let ls = through(s, 3);
    let ks = through(t, 2);
    let meet = |u: &[Point], v: &[Point]| -> Point { crate::space::intersection(u, v)[0] };
    let mut x = [[0; 2]; 3];
    for i in 0..3 {
        for j in 0..2 {
            x[i][j] = meet(&ls[i], &ks[j]);
        }
    }
    let y = *ks[0]
        .iter()
        .find(|&&q| q != t && q != x[0][0] && q != x[1][0] && q != x[2][0])
        .expect("degree above 4 leaves a fifth point on the line");
    let mut pairs = vec![(x[0][0], y)];
    for (i, row) in x.iter().enumerate() {
        for (j, &pt) in row.iter().enumerate() {
            if (i, j) != (0, 0) {
                pairs.push((pt, pt));
            }
        }
    }
    Ok(Deg5Witness {
        horizon,
        s,
        t,
        l: [ls[0].clone(), ls[1].clone(), ls[2].clone()],
        k: [ks[0].clone(), ks[1].clone()],
        x,
        y,
        map: PartialMap::new(pairs),
    })
}
