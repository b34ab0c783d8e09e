//! Planarisation: adding intersection points of parallel lines.
//!
//! An elementary step adds one point on two or more pairwise parallel
//! lines and on no other nontrivial line. A step on exactly two lines is
//! trivial. Planar closure and projective completion are built on top.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morphisms::{is_partial_isomorphism, PartialMap};
use crate::space::{disjoint, Dense, Line, LinearSpace, Point};

/// Default cap on the number of points produced by projective completion.
pub const DEFAULT_COMPLETION_POINT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanariseError {
    #[error("{0:?} is not a line of the space")]
    UnknownLine(Line),
    #[error("lines {0:?} and {1:?} are not parallel")]
    LinesNotParallel(Line, Line),
    #[error("pair ({0:?}, {1:?}) is not parallel")]
    PairNotParallel(Line, Line),
    #[error("pair ({0:?}, {1:?}) listed twice")]
    DuplicatePair(Line, Line),
    #[error("lines {0:?} and {1:?} meet, so the list is not pairwise parallel")]
    NotPairwiseParallel(Line, Line),
    #[error("concurrent planarisation needs at least three lines, got {0}")]
    FewerThanThreeLines(usize),
    #[error("point {point} out of range for a space on {n_points} points")]
    PointOutOfRange { point: Point, n_points: usize },
    #[error("map is not an embedding")]
    NotAnEmbedding,
    #[error("completion round {round} needs {points_needed} points, above the budget of {budget}")]
    CompletionBudgetExceeded {
        round: usize,
        points_needed: usize,
        budget: usize,
    },
    #[error("trace does not replay to its recorded result")]
    TraceMismatch,
}

/// One elementary planarisation step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryStep {
    pub new_point: Point,
    /// The lines of the pre-step space that the new point lies on.
    pub intersected_lines: Vec<Line>,
    pub trivial: bool,
}

/// A base space and a sequence of elementary steps applied to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarisationTrace {
    pub base: LinearSpace,
    pub steps: Vec<ElementaryStep>,
    pub result: LinearSpace,
}

impl PlanarisationTrace {
    pub fn new(base: LinearSpace) -> Self {
        PlanarisationTrace {
            result: base.clone(),
            base,
            steps: Vec::new(),
        }
    }

    /// Applies a step on `lines` (lines of the current result).
    pub fn push(&mut self, lines: &[Line]) -> Result<Point, PlanariseError> {
        let (next, step) = intersect_lines(&self.result, lines)?;
        let p = step.new_point;
        self.result = next;
        self.steps.push(step);
        Ok(p)
    }

    /// Adds a trivial step on the two lines through the given point pairs.
    pub fn push_pair(
        &mut self,
        (a, b): (Point, Point),
        (c, d): (Point, Point),
    ) -> Result<Point, PlanariseError> {
        let l1 = self.result.line_through_unchecked(a, b);
        let l2 = self.result.line_through_unchecked(c, d);
        self.push(&[l1, l2])
    }

    /// Rebuilds the result from the base.
    pub fn replay(&self) -> Result<LinearSpace, PlanariseError> {
        let mut cur = self.base.clone();
        for s in &self.steps {
            let (next, step) = intersect_lines(&cur, &s.intersected_lines)?;
            if step != *s {
                return Err(PlanariseError::TraceMismatch);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Replays and compares with the recorded result.
    pub fn verify(&self) -> bool {
        matches!(self.replay(), Ok(s) if s == self.result)
    }
}

fn check_line(a: &LinearSpace, l: &[Point]) -> Result<(), PlanariseError> {
    if a.is_line(l) {
        Ok(())
    } else {
        Err(PlanariseError::UnknownLine(l.to_vec()))
    }
}

/// Adds one point on the given pairwise parallel lines.
fn intersect_lines(
    a: &LinearSpace,
    lines: &[Line],
) -> Result<(LinearSpace, ElementaryStep), PlanariseError> {
    for l in lines {
        check_line(a, l)?;
    }
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if !disjoint(&lines[i], &lines[j]) {
                return Err(if lines.len() == 2 {
                    PlanariseError::LinesNotParallel(lines[i].clone(), lines[j].clone())
                } else {
                    PlanariseError::NotPairwiseParallel(lines[i].clone(), lines[j].clone())
                });
            }
        }
    }
    let refs: Vec<&[Point]> = lines.iter().map(Vec::as_slice).collect();
    let b = a.with_point_on(&refs);
    let step = ElementaryStep {
        new_point: a.n_points(),
        intersected_lines: lines.to_vec(),
        trivial: lines.len() == 2,
    };
    Ok((b, step))
}

/// Adds a point where `l1` and `l2` meet.
pub fn elementary_planarisation(
    a: &LinearSpace,
    l1: &[Point],
    l2: &[Point],
) -> Result<(LinearSpace, ElementaryStep), PlanariseError> {
    intersect_lines(a, &[sorted(l1), sorted(l2)])
}

/// Adds one point on at least three pairwise parallel lines.
pub fn concurrent_planarisation(
    a: &LinearSpace,
    ls: &[Line],
) -> Result<LinearSpace, PlanariseError> {
    if ls.len() < 3 {
        return Err(PlanariseError::FewerThanThreeLines(ls.len()));
    }
    let ls: Vec<Line> = ls.iter().map(|l| sorted(l)).collect();
    intersect_lines(a, &ls).map(|(b, _)| b)
}

fn sorted(l: &[Point]) -> Line {
    let mut v = l.to_vec();
    v.sort_unstable();
    v
}

fn check_pairs(
    a: &LinearSpace,
    pairs: &[(Line, Line)],
) -> Result<Vec<(Line, Line)>, PlanariseError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(pairs.len());
    for (l1, l2) in pairs {
        let (mut x, mut y) = (sorted(l1), sorted(l2));
        check_line(a, &x)?;
        check_line(a, &y)?;
        if !disjoint(&x, &y) {
            return Err(PlanariseError::PairNotParallel(x, y));
        }
        if y < x {
            std::mem::swap(&mut x, &mut y);
        }
        if !seen.insert((x.clone(), y.clone())) {
            return Err(PlanariseError::DuplicatePair(x, y));
        }
        out.push((x, y));
    }
    Ok(out)
}

/// Adds one point per listed parallel pair, on the extensions of its two
/// lines only. New points are numbered in list order.
pub fn trivial_planarisation(
    a: &LinearSpace,
    pairs: &[(Line, Line)],
) -> Result<LinearSpace, PlanariseError> {
    let pairs = check_pairs(a, pairs)?;
    Ok(apply_pairs(a, &pairs))
}

/// Same as [`trivial_planarisation`], recorded as a sequence of steps.
pub fn trivial_planarisation_trace(
    a: &LinearSpace,
    pairs: &[(Line, Line)],
) -> Result<PlanarisationTrace, PlanariseError> {
    let pairs = check_pairs(a, pairs)?;
    let mut t = PlanarisationTrace::new(a.clone());
    for (l1, l2) in &pairs {
        t.push_pair((l1[0], l1[1]), (l2[0], l2[1]))?;
    }
    Ok(t)
}

fn apply_pairs(a: &LinearSpace, pairs: &[(Line, Line)]) -> LinearSpace {
    let n = a.n_points();
    let mut extra: Vec<Vec<Point>> = vec![Vec::new(); a.lines().len()];
    let mut new_trivial: std::collections::BTreeMap<(Point, Point), Vec<Point>> =
        Default::default();
    for (i, (l1, l2)) in pairs.iter().enumerate() {
        for l in [l1, l2] {
            match a.stored_line_index(l[0], l[1]) {
                Some(li) => extra[li].push(n + i),
                None => new_trivial.entry((l[0], l[1])).or_default().push(n + i),
            }
        }
    }
    let mut lines: Vec<Line> = a
        .lines()
        .iter()
        .zip(extra)
        .map(|(l, e)| l.iter().copied().chain(e).collect())
        .collect();
    for ((x, y), e) in new_trivial {
        lines.push([x, y].into_iter().chain(e).collect());
    }
    LinearSpace::from_lines_trusted(n + pairs.len(), lines)
}

/// Least superset of `points` closed under adding, for every two lines
/// spanned by the set, their meeting point in `b`.
pub fn planar_closure(points: &[Point], b: &LinearSpace) -> Result<Vec<Point>, PlanariseError> {
    let d = Dense::new(b);
    closure_dense(points, &d)
}

pub(crate) fn closure_dense(points: &[Point], d: &Dense) -> Result<Vec<Point>, PlanariseError> {
    let n = d.n;
    if let Some(&p) = points.iter().find(|&&p| p >= n) {
        return Err(PlanariseError::PointOutOfRange {
            point: p,
            n_points: n,
        });
    }
    let mut in_set = vec![false; n];
    let mut members: Vec<Point> = Vec::new();
    for &p in points {
        if !in_set[p] {
            in_set[p] = true;
            members.push(p);
        }
    }
    let mut active: Vec<u32> = Vec::new();
    let mut is_active = vec![false; d.lines.len()];
    let mut queue: Vec<u32> = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let l = d.line(members[i], members[j]);
            if !is_active[l as usize] {
                is_active[l as usize] = true;
                queue.push(l);
            }
        }
    }
    while let Some(l) = queue.pop() {
        for &m in &active {
            if let Some(p) = meet(d, l, m) {
                if !in_set[p] {
                    in_set[p] = true;
                    for &q in &members {
                        let nl = d.line(p, q);
                        if !is_active[nl as usize] {
                            is_active[nl as usize] = true;
                            queue.push(nl);
                        }
                    }
                    members.push(p);
                }
            }
        }
        active.push(l);
    }
    members.sort_unstable();
    Ok(members)
}

fn meet(d: &Dense, l: u32, m: u32) -> Option<Point> {
    let (a, b) = (&d.lines[l as usize], &d.lines[m as usize]);
    let (small, other) = if a.len() <= b.len() { (a, m) } else { (b, l) };
    small
        .iter()
        .copied()
        .find(|&p| d.point_lines[p].binary_search(&other).is_ok())
}

/// The set equals its own planar closure in `b`.
pub fn is_aplanar(points: &[Point], b: &LinearSpace) -> Result<bool, PlanariseError> {
    let mut s = points.to_vec();
    s.sort_unstable();
    s.dedup();
    Ok(planar_closure(&s, b)? == s)
}

/// `b` is generated from the image of `a` under `e` by intersection points.
pub fn is_planarisation(
    a: &LinearSpace,
    b: &LinearSpace,
    e: &[Point],
) -> Result<bool, PlanariseError> {
    if e.len() != a.n_points() {
        return Err(PlanariseError::NotAnEmbedding);
    }
    let m = PartialMap::new(e.iter().enumerate().map(|(i, &j)| (i, j)).collect());
    match is_partial_isomorphism(a, b, &m) {
        Ok(true) => {}
        _ => return Err(PlanariseError::NotAnEmbedding),
    }
    Ok(planar_closure(e, b)?.len() == b.n_points())
}

/// Output of [`projective_completion`].
#[derive(Debug, Clone, Serialize)]
pub struct Completion {
    pub space: LinearSpace,
    /// The result is a projective plane.
    pub closed: bool,
    pub rounds_used: usize,
    pub free_points_added: usize,
    pub rounds: Vec<RoundSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundSummary {
    pub points: usize,
    pub lines: usize,
    pub parallel_pairs: usize,
}

fn summary(s: &LinearSpace) -> RoundSummary {
    RoundSummary {
        points: s.n_points(),
        lines: s.line_count(),
        parallel_pairs: s.parallel_pair_count(),
    }
}

/// Free points to add so that the space has an independent 4-set.
pub fn nondegeneracy_padding(a: &LinearSpace) -> usize {
    (0..=4)
        .find(|&k| !a.with_free_points(k).is_degenerate())
        .expect("four free points are always independent")
}

/// One completion round: a trivial planarisation over all parallel pairs in
/// canonical order.
pub fn completion_round(a: &LinearSpace) -> LinearSpace {
    apply_pairs(a, &a.parallel_pairs())
}

/// Truncated projective completion with the default point budget.
pub fn projective_completion(
    a: &LinearSpace,
    max_rounds: usize,
) -> Result<Completion, PlanariseError> {
    projective_completion_with(
        a,
        max_rounds,
        DEFAULT_COMPLETION_POINT_BUDGET,
        &mut |_, _| {},
    )
}

/// Truncated projective completion. `on_round` sees each round's output.
///
/// Before each round the number of new points is computed by counting, and
/// the round is refused if it would exceed `point_budget`.
pub fn projective_completion_with(
    a: &LinearSpace,
    max_rounds: usize,
    point_budget: usize,
    on_round: &mut dyn FnMut(usize, &LinearSpace),
) -> Result<Completion, PlanariseError> {
    let pad = nondegeneracy_padding(a);
    let mut cur = a.with_free_points(pad);
    let mut rounds = vec![summary(&cur)];
    let mut used = 0;
    while used < max_rounds && !cur.is_closed() {
        let needed = cur.n_points() + cur.parallel_pair_count();
        if needed > point_budget {
            return Err(PlanariseError::CompletionBudgetExceeded {
                round: used + 1,
                points_needed: needed,
                budget: point_budget,
            });
        }
        cur = completion_round(&cur);
        used += 1;
        on_round(used, &cur);
        rounds.push(summary(&cur));
    }
    let closed = cur.is_closed() && !cur.is_degenerate();
    Ok(Completion {
        space: cur,
        closed,
        rounds_used: used,
        free_points_added: pad,
        rounds,
    })
}

/// Points of `s` lying on the extension of `l` (a line of a subspace).
pub fn extension_of(s: &LinearSpace, l: &[Point]) -> Line {
    s.line_through_unchecked(l[0], l[1])
}

/// Pairs of lines of `before` that are parallel there but meet in `after`
/// (whose first points are those of `before`).
pub fn unresolved_old_pairs(before: &LinearSpace, after: &LinearSpace) -> Vec<(Line, Line)> {
    before
        .parallel_pairs()
        .into_iter()
        .filter(|(l1, l2)| disjoint(&extension_of(after, l1), &extension_of(after, l2)))
        .collect()
}
