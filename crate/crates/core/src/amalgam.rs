//! Amalgamation of linear spaces.
//!
//! Two extensions `f1: A -> B1`, `f2: A -> B2` are amalgamated by a space
//! `C` with embeddings `e1`, `e2` agreeing on `A`. Since every class used
//! here is hereditary, an amalgam exists in a class iff one exists on the
//! union of the two images, so all searches below work on point sets of
//! the form `B1 ⊔ (B2 \ identified points)`.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::{
    enumerate_levels, one_point_extensions, ClassKind, ClassSpec, EnumerateError,
};
use crate::morphisms::{automorphisms, is_partial_isomorphism, PartialMap};
use crate::planarise::{concurrent_planarisation, is_aplanar, PlanarisationTrace, PlanariseError};
use crate::space::{disjoint, Dense, Line, LinearSpace, Point};

pub const DEFAULT_AMALGAM_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmalgamError {
    #[error("neither embedding is aplanar")]
    NotAplanarEither,
    #[error("map {0} is not an embedding")]
    NotAnEmbedding(&'static str),
    #[error("the space is closed: it has no parallel pair")]
    SpaceIsClosed,
    #[error("{0} is not in class {1}")]
    NotInClass(&'static str, String),
    #[error("{0} is not a one-point extension of the base")]
    NotOnePointExtension(&'static str),
    #[error("amalgam search exceeded {0} nodes")]
    SearchBudgetExceeded(u64),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Planarise(#[from] PlanariseError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
}

/// A space `c` with embeddings of both extensions agreeing over the base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Amalgam {
    pub c: LinearSpace,
    pub e1: Vec<Point>,
    pub e2: Vec<Point>,
    /// `e1 ∘ f1`, equal to `e2 ∘ f2`.
    pub over: Vec<Point>,
}

pub fn is_embedding(a: &LinearSpace, b: &LinearSpace, f: &[Point]) -> bool {
    if f.len() != a.n_points() {
        return false;
    }
    let m = PartialMap::new(f.iter().enumerate().map(|(i, &j)| (i, j)).collect());
    matches!(is_partial_isomorphism(a, b, &m), Ok(true))
}

/// Checks every condition of the amalgam definition.
pub fn check_amalgam(
    a: &LinearSpace,
    b1: &LinearSpace,
    f1: &[Point],
    b2: &LinearSpace,
    f2: &[Point],
    am: &Amalgam,
) -> bool {
    is_embedding(b1, &am.c, &am.e1)
        && is_embedding(b2, &am.c, &am.e2)
        && (0..a.n_points()).all(|x| am.e1[f1[x]] == am.e2[f2[x]] && am.over[x] == am.e1[f1[x]])
}

/// Glues `b1` and `b2` along a partial identification: `id2[y]` is the id
/// in the union of point `y` of `b2`. Lines of `b1` and `b2` through the
/// same two shared points are merged; nothing else is added.
fn glue(
    b1: &LinearSpace,
    b2: &LinearSpace,
    id2: &[Point],
    n_union: usize,
) -> Result<LinearSpace, AmalgamError> {
    let shared: HashSet<Point> = (0..b2.n_points())
        .map(|y| id2[y])
        .filter(|&u| u < b1.n_points())
        .collect();
    let mut merged: BTreeMap<(Point, Point), Vec<Point>> = BTreeMap::new();
    let mut lines: Vec<Line> = Vec::new();
    let mut place = |l: Line| {
        let mut on: Vec<Point> = l.iter().copied().filter(|p| shared.contains(p)).collect();
        on.sort_unstable();
        if on.len() >= 2 {
            merged.entry((on[0], on[1])).or_default().extend(l);
        } else {
            lines.push(l);
        }
    };
    for l in b1.lines() {
        place(l.clone());
    }
    for l in b2.lines() {
        place(l.iter().map(|&y| id2[y]).collect());
    }
    for (_, mut l) in merged {
        l.sort_unstable();
        l.dedup();
        lines.push(l);
    }
    LinearSpace::new(n_union, &lines).map_err(|e| AmalgamError::Construction(e.to_string()))
}

/// Identification layout: `b1` keeps its ids; `b2` points in the image of
/// `f2` go to the matching `b1` points, the rest are appended in order.
fn layout(
    b1: &LinearSpace,
    f1: &[Point],
    b2: &LinearSpace,
    f2: &[Point],
    g: &[(Point, Point)],
) -> (Vec<Point>, usize) {
    let mut id2 = vec![usize::MAX; b2.n_points()];
    for (x, &y) in f2.iter().enumerate() {
        id2[y] = f1[x];
    }
    for &(u, v) in g {
        id2[v] = u;
    }
    let mut next = b1.n_points();
    for slot in id2.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    (id2, next)
}

/// Free amalgam over embeddings at least one of which is aplanar.
///
/// Cross triples are collinear exactly when all three points lie on the
/// extensions of one common line of the base.
pub fn free_amalgam(
    a: &LinearSpace,
    b1: &LinearSpace,
    b2: &LinearSpace,
    f1: &[Point],
    f2: &[Point],
) -> Result<Amalgam, AmalgamError> {
    if !is_embedding(a, b1, f1) {
        return Err(AmalgamError::NotAnEmbedding("f1"));
    }
    if !is_embedding(a, b2, f2) {
        return Err(AmalgamError::NotAnEmbedding("f2"));
    }
    if !is_aplanar(f1, b1)? && !is_aplanar(f2, b2)? {
        return Err(AmalgamError::NotAplanarEither);
    }
    let (id2, n) = layout(b1, f1, b2, f2, &[]);
    let c = glue(b1, b2, &id2, n)?;
    Ok(Amalgam {
        c,
        e1: (0..b1.n_points()).collect(),
        e2: id2,
        over: f1.to_vec(),
    })
}

/// Exhaustive search for an amalgam in `class` on the union of the two
/// images. Returns `None` when the search space is exhausted.
///
/// The search fixes a partial identification of the new points of `b1`
/// with those of `b2` (kept consistent as a partial isomorphism), glues the
/// lines forced by shared pairs, and for restricted classes additionally
/// tries every way of covering cross pairs by merged lines.
pub fn find_amalgam(
    a: &LinearSpace,
    b1: &LinearSpace,
    f1: &[Point],
    b2: &LinearSpace,
    f2: &[Point],
    class: &ClassSpec,
    budget: u64,
) -> Result<Option<Amalgam>, AmalgamError> {
    if !is_embedding(a, b1, f1) {
        return Err(AmalgamError::NotAnEmbedding("f1"));
    }
    if !is_embedding(a, b2, f2) {
        return Err(AmalgamError::NotAnEmbedding("f2"));
    }
    let mut s = UnionSearch::new(a, b1, f1, b2, f2, class, budget);
    let mut g = Vec::new();
    let found = s.identify(0, &mut g)?;
    Ok(found)
}

struct UnionSearch<'a> {
    b1: &'a LinearSpace,
    f1: &'a [Point],
    b2: &'a LinearSpace,
    f2: &'a [Point],
    d1: Dense,
    d2: Dense,
    class: &'a ClassSpec,
    /// new points of b1 and b2
    p1: Vec<Point>,
    p2: Vec<Point>,
    /// current map from b1 points to b2 points on the overlap
    h: Vec<usize>,
    dom: Vec<Point>,
    used2: Vec<bool>,
    nodes: u64,
    budget: u64,
}

impl<'a> UnionSearch<'a> {
    fn new(
        a: &LinearSpace,
        b1: &'a LinearSpace,
        f1: &'a [Point],
        b2: &'a LinearSpace,
        f2: &'a [Point],
        class: &'a ClassSpec,
        budget: u64,
    ) -> Self {
        let in1: HashSet<Point> = f1.iter().copied().collect();
        let in2: HashSet<Point> = f2.iter().copied().collect();
        let mut h = vec![usize::MAX; b1.n_points()];
        for x in 0..a.n_points() {
            h[f1[x]] = f2[x];
        }
        let mut used2 = vec![false; b2.n_points()];
        for &y in f2 {
            used2[y] = true;
        }
        UnionSearch {
            b1,
            f1,
            b2,
            f2,
            d1: Dense::new(b1),
            d2: Dense::new(b2),
            class,
            p1: (0..b1.n_points()).filter(|p| !in1.contains(p)).collect(),
            p2: (0..b2.n_points()).filter(|p| !in2.contains(p)).collect(),
            h,
            dom: f1.to_vec(),
            used2,
            nodes: 0,
            budget,
        }
    }

    fn tick(&mut self) -> Result<(), AmalgamError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(AmalgamError::SearchBudgetExceeded(self.budget))
        } else {
            Ok(())
        }
    }

    fn consistent(&self, u: Point, v: Point) -> bool {
        let dom = &self.dom;
        for i in 0..dom.len() {
            for j in i + 1..dom.len() {
                let (x, y) = (dom[i], dom[j]);
                if self.d1.collinear(u, x, y) != self.d2.collinear(v, self.h[x], self.h[y]) {
                    return false;
                }
            }
        }
        true
    }

    /// Decides the fate of `p1[i..]`: identified with an unused new point
    /// of `b2`, or kept apart.
    fn identify(
        &mut self,
        i: usize,
        g: &mut Vec<(Point, Point)>,
    ) -> Result<Option<Amalgam>, AmalgamError> {
        self.tick()?;
        if i == self.p1.len() {
            return self.complete(g);
        }
        let u = self.p1[i];
        for k in 0..self.p2.len() {
            let v = self.p2[k];
            if self.used2[v] || !self.consistent(u, v) {
                continue;
            }
            self.used2[v] = true;
            self.h[u] = v;
            self.dom.push(u);
            g.push((u, v));
            let r = self.identify(i + 1, g)?;
            g.pop();
            self.dom.pop();
            self.h[u] = usize::MAX;
            self.used2[v] = false;
            if r.is_some() {
                return Ok(r);
            }
        }
        self.identify(i + 1, g)
    }

    fn complete(&mut self, g: &[(Point, Point)]) -> Result<Option<Amalgam>, AmalgamError> {
        let (id2, n) = layout(self.b1, self.f1, self.b2, self.f2, g);
        let forced = match glue(self.b1, self.b2, &id2, n) {
            Ok(c) => c,
            // forced merges only grow under further merging
            Err(_) => return Ok(None),
        };
        let make = |c: LinearSpace| Amalgam {
            c,
            e1: (0..self.b1.n_points()).collect(),
            e2: id2.clone(),
            over: self.f1.to_vec(),
        };
        if self.class.contains(&forced) {
            return Ok(Some(make(forced)));
        }
        if self.class.kind == ClassKind::All {
            return Ok(None);
        }
        let found = self.optional_merges(&forced, &id2, n)?;
        Ok(found.map(make))
    }

    /// Searches over sets of extra merged lines on top of the forced glue.
    fn optional_merges(
        &mut self,
        forced: &LinearSpace,
        id2: &[Point],
        n: usize,
    ) -> Result<Option<LinearSpace>, AmalgamError> {
        let n1 = self.b1.n_points();
        let overlap: HashSet<Point> = id2.iter().copied().filter(|&u| u < n1).collect();
        let new1: Vec<Point> = (0..n1).filter(|p| !overlap.contains(p)).collect();
        let new2: Vec<Point> = (n1..n).collect();
        if new1.is_empty() || new2.is_empty() {
            return Ok(None);
        }
        let lines1: Vec<Line> = self.b1.all_lines();
        let lines2: Vec<Line> = self
            .b2
            .all_lines()
            .into_iter()
            .map(|l| {
                let mut v: Line = l.iter().map(|&y| id2[y]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let meet_o = |l: &Line| -> Vec<Point> {
            l.iter().copied().filter(|p| overlap.contains(p)).collect()
        };
        let max_line = self.class.max_degree.unwrap_or(usize::MAX);

        // a candidate is a new line X with X ∩ B1 and X ∩ B2 each a line or a point
        struct Cand {
            line: Line,
            uses: Vec<(u8, usize)>,
            cross: Vec<(Point, Point)>,
        }
        let mut cands: Vec<Cand> = Vec::new();
        let cross_of = |x: &Line| -> Vec<(Point, Point)> {
            let a: Vec<Point> = x.iter().copied().filter(|p| new1.contains(p)).collect();
            let b: Vec<Point> = x.iter().copied().filter(|&p| p >= n1).collect();
            let mut out = Vec::new();
            for &u in &a {
                for &v in &b {
                    out.push((u, v));
                }
            }
            out
        };
        let free1: Vec<usize> = (0..lines1.len())
            .filter(|&i| meet_o(&lines1[i]).len() <= 1)
            .collect();
        let free2: Vec<usize> = (0..lines2.len())
            .filter(|&j| meet_o(&lines2[j]).len() <= 1)
            .collect();
        for &i in &free1 {
            let o1 = meet_o(&lines1[i]);
            for &j in &free2 {
                if meet_o(&lines2[j]) != o1 {
                    continue;
                }
                let mut x: Line = lines1[i].iter().chain(&lines2[j]).copied().collect();
                x.sort_unstable();
                x.dedup();
                if x.len() <= max_line {
                    let cross = cross_of(&x);
                    cands.push(Cand {
                        line: x,
                        uses: vec![(1, i), (2, j)],
                        cross,
                    });
                }
            }
            if o1.is_empty() {
                for &v in &new2 {
                    let mut x = lines1[i].clone();
                    x.push(v);
                    x.sort_unstable();
                    if x.len() <= max_line {
                        let cross = cross_of(&x);
                        cands.push(Cand {
                            line: x,
                            uses: vec![(1, i)],
                            cross,
                        });
                    }
                }
            }
        }
        for &j in &free2 {
            if !meet_o(&lines2[j]).is_empty() {
                continue;
            }
            for &u in &new1 {
                let mut x = lines2[j].clone();
                x.push(u);
                x.sort_unstable();
                if x.len() <= max_line {
                    let cross = cross_of(&x);
                    cands.push(Cand {
                        line: x,
                        uses: vec![(2, j)],
                        cross,
                    });
                }
            }
        }

        let mut covered: HashSet<(Point, Point)> = HashSet::new();
        for l in forced.lines() {
            for c in cross_of(l) {
                covered.insert(c);
            }
        }
        let pairs: Vec<(Point, Point)> = new1
            .iter()
            .flat_map(|&u| new2.iter().map(move |&v| (u, v)))
            .filter(|c| !covered.contains(c))
            .collect();
        let by_pair: Vec<Vec<usize>> = pairs
            .iter()
            .map(|p| {
                (0..cands.len())
                    .filter(|&k| cands[k].cross.contains(p))
                    .collect()
            })
            .collect();

        struct St {
            blocked: HashSet<(Point, Point)>,
            used: HashSet<(u8, usize)>,
            chosen: Vec<usize>,
        }
        let mut st = St {
            blocked: covered,
            used: HashSet::new(),
            chosen: Vec::new(),
        };

        fn rec(
            me: &mut UnionSearch<'_>,
            idx: usize,
            pairs: &[(Point, Point)],
            by_pair: &[Vec<usize>],
            cands: &[Cand],
            st: &mut St,
            build: &dyn Fn(&[usize]) -> Option<LinearSpace>,
        ) -> Result<Option<LinearSpace>, AmalgamError> {
            me.tick()?;
            let mut idx = idx;
            while idx < pairs.len() && st.blocked.contains(&pairs[idx]) {
                idx += 1;
            }
            if idx == pairs.len() {
                return Ok(build(&st.chosen));
            }
            for &k in &by_pair[idx] {
                let c = &cands[k];
                if c.uses.iter().any(|u| st.used.contains(u))
                    || c.cross.iter().any(|p| st.blocked.contains(p))
                {
                    continue;
                }
                for p in &c.cross {
                    st.blocked.insert(*p);
                }
                for u in &c.uses {
                    st.used.insert(*u);
                }
                st.chosen.push(k);
                let r = rec(me, idx + 1, pairs, by_pair, cands, st, build)?;
                st.chosen.pop();
                for u in &c.uses {
                    st.used.remove(u);
                }
                for p in &c.cross {
                    st.blocked.remove(p);
                }
                if r.is_some() {
                    return Ok(r);
                }
            }
            // leave this cross pair on a trivial line
            st.blocked.insert(pairs[idx]);
            let r = rec(me, idx + 1, pairs, by_pair, cands, st, build);
            st.blocked.remove(&pairs[idx]);
            r
        }

        let class = self.class;
        let build = |chosen: &[usize]| -> Option<LinearSpace> {
            let mut drop1: HashSet<Line> = HashSet::new();
            let mut lines: Vec<Line> = Vec::new();
            for &k in chosen {
                for &(side, i) in &cands[k].uses {
                    drop1.insert(if side == 1 {
                        lines1[i].clone()
                    } else {
                        lines2[i].clone()
                    });
                }
                lines.push(cands[k].line.clone());
            }
            lines.extend(
                forced
                    .lines()
                    .iter()
                    .filter(|l| !drop1.contains(*l))
                    .cloned(),
            );
            let c = LinearSpace::new(n, &lines).ok()?;
            class.contains(&c).then_some(c)
        };
        rec(self, 0, &pairs, &by_pair, &cands, &mut st, &build)
    }
}

/// How [`amalgamate_in_class`] found its amalgam.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AmalgamMove {
    /// The two new points were identified.
    Identify,
    /// Union with only the forced merges.
    FreeUnion,
    /// Union plus the line through both new points and this base point.
    DeclaredTriple(Point),
    /// Found by the exhaustive union search.
    Search,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassAmalgam {
    pub amalgam: Amalgam,
    pub how: AmalgamMove,
}

fn check_one_point(
    a: &LinearSpace,
    b: &LinearSpace,
    which: &'static str,
) -> Result<(), AmalgamError> {
    if b.n_points() != a.n_points() + 1 || b.restrict_prefix(a.n_points()) != *a {
        return Err(AmalgamError::NotOnePointExtension(which));
    }
    Ok(())
}

/// Amalgamates two one-point extensions (new point `n` in each) inside the
/// class. Tries, in order: identifying the new points, the union with one
/// declared line `{x, p, q}`, the free union, and finally the exhaustive
/// union search.
pub fn amalgamate_in_class(
    a: &LinearSpace,
    b1: &LinearSpace,
    b2: &LinearSpace,
    class: &ClassSpec,
) -> Result<Option<ClassAmalgam>, AmalgamError> {
    check_one_point(a, b1, "b1")?;
    check_one_point(a, b2, "b2")?;
    for (s, name) in [(a, "a"), (b1, "b1"), (b2, "b2")] {
        if !class.contains(s) {
            return Err(AmalgamError::NotInClass(name, class.name()));
        }
    }
    let n = a.n_points();
    let id: Vec<Point> = (0..n).collect();
    let over = id.clone();
    if b1 == b2 {
        return Ok(Some(ClassAmalgam {
            amalgam: Amalgam {
                c: b1.clone(),
                e1: (0..=n).collect(),
                e2: (0..=n).collect(),
                over,
            },
            how: AmalgamMove::Identify,
        }));
    }
    let id2: Vec<Point> = (0..n).chain([n + 1]).collect();
    let e1: Vec<Point> = (0..=n).collect();
    let wrap = |c: LinearSpace, how| ClassAmalgam {
        amalgam: Amalgam {
            c,
            e1: e1.clone(),
            e2: id2.clone(),
            over: over.clone(),
        },
        how,
    };
    if let Ok(free) = glue(b1, b2, &id2, n + 2) {
        for x in 0..n {
            if b1.stored_line_index(n, x).is_some() || b2.stored_line_index(n, x).is_some() {
                continue;
            }
            let mut lines = free.lines().to_vec();
            lines.push(vec![x, n, n + 1]);
            if let Ok(c) = LinearSpace::new(n + 2, &lines) {
                if class.contains(&c) {
                    return Ok(Some(wrap(c, AmalgamMove::DeclaredTriple(x))));
                }
            }
        }
        if class.contains(&free) {
            return Ok(Some(wrap(free, AmalgamMove::FreeUnion)));
        }
    }
    let found = find_amalgam(a, b1, &id, b2, &id, class, DEFAULT_AMALGAM_BUDGET)?;
    Ok(found.map(|amalgam| ClassAmalgam {
        amalgam,
        how: AmalgamMove::Search,
    }))
}

/// Evidence that two planarisations of a space have no amalgam over it.
///
/// `chain` is a planarisation of the base ending at `A_i`. Both `b1` and
/// `b2` extend `A_i` by one point: `a_prime` on the extensions of `l1`,
/// `l2`, `l3`, and `a_dblprime` on those of `l1`, `l2` only. Any amalgam
/// would agree on `A_i` (planarisations are epimorphisms), so both new
/// points would be the meet of the images of `l1` and `l2`, while only one
/// of them is collinear with `noncollinear_with`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncompatibilityCertificate {
    pub l1: Line,
    pub l2: Line,
    pub l3: Line,
    pub a_prime: Point,
    pub a_dblprime: Point,
    /// Two points of `l3` not collinear with `a_dblprime` in `b2`.
    pub noncollinear_with: (Point, Point),
    pub chain: PlanarisationTrace,
    /// 1 when the starting parallel pair was two trivial lines, else 2.
    pub case: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IncompatiblePair {
    pub b1: LinearSpace,
    pub b2: LinearSpace,
    pub cert: IncompatibilityCertificate,
}

/// Two planarisations of a non-closed space with no amalgam over it.
///
/// The lexicographically least parallel pair decides the case. With two
/// trivial lines the intersection points b1, b2 of the cross joins give a
/// third line parallel to both; otherwise the points b1..b4 reduce to that
/// situation first. One planarisation makes the three lines concurrent,
/// the other only meets the first two.
pub fn incompatible_planarisations(a: &LinearSpace) -> Result<IncompatiblePair, AmalgamError> {
    let (l, lp) = a
        .parallel_pairs()
        .into_iter()
        .next()
        .ok_or(AmalgamError::SpaceIsClosed)?;
    incompatible_planarisations_from(a, &l, &lp)
}

/// [`incompatible_planarisations`] starting from a chosen parallel pair.
pub fn incompatible_planarisations_from(
    a: &LinearSpace,
    l: &[Point],
    lp: &[Point],
) -> Result<IncompatiblePair, AmalgamError> {
    if !a.is_line(l) || !a.is_line(lp) || !disjoint(l, lp) {
        return Err(AmalgamError::Planarise(PlanariseError::PairNotParallel(
            l.to_vec(),
            lp.to_vec(),
        )));
    }
    let mut t = PlanarisationTrace::new(a.clone());
    let (case, (a1, a2), (a1p, a2p));
    if l.len() == 2 && lp.len() == 2 {
        case = 1;
        (a1, a2, a1p, a2p) = (l[0], l[1], lp[0], lp[1]);
    } else {
        case = 2;
        let (big, other) = if l.len() >= 3 { (l, lp) } else { (lp, l) };
        let (c1, c2, c3) = (big[0], big[1], big[2]);
        let (c1p, c2p) = (other[0], other[1]);
        let b1 = meet_or_add(&mut t, (c1, c1p), (c3, c2p))?;
        let b2 = meet_or_add(&mut t, (c2, c1p), (c3, c2p))?;
        let b3 = t.push(&[big.to_vec(), other.to_vec()])?;
        let b4 = meet_or_add(&mut t, (b3, b2), (c1, c1p))?;
        // ρ(b4, a2) and ρ(b1, b3) are parallel trivial lines
        (a1, a2, a1p, a2p) = (b4, c2, b1, b3);
    }
    let b1 = meet_or_add(&mut t, (a1, a1p), (a2, a2p))?;
    let b2 = meet_or_add(&mut t, (a1, a2p), (a1p, a2))?;
    let ai = t.result.clone();
    let l1 = ai.line_through_unchecked(a1, a2);
    let l2 = ai.line_through_unchecked(a1p, a2p);
    let l3 = ai.line_through_unchecked(b1, b2);
    let m = ai.n_points();
    let big = concurrent_planarisation(&ai, &[l1.clone(), l2.clone(), l3.clone()])?;
    let small = crate::planarise::trivial_planarisation(&ai, &[(l1.clone(), l2.clone())])?;
    let cert = IncompatibilityCertificate {
        noncollinear_with: (l3[0], l3[1]),
        l1,
        l2,
        l3,
        a_prime: m,
        a_dblprime: m,
        chain: t,
        case,
    };
    Ok(IncompatiblePair {
        b1: big,
        b2: small,
        cert,
    })
}

/// The existing meet of two joins, or a new trivial step creating it.
fn meet_or_add(
    t: &mut PlanarisationTrace,
    (a, b): (Point, Point),
    (c, d): (Point, Point),
) -> Result<Point, AmalgamError> {
    let s = &t.result;
    let l1 = s.line_through_unchecked(a, b);
    let l2 = s.line_through_unchecked(c, d);
    if let Some(&p) = l1.iter().find(|p| l2.binary_search(p).is_ok()) {
        return Ok(p);
    }
    Ok(t.push(&[l1, l2])?)
}

/// Replays the incompatibility argument. True iff every step holds.
pub fn verify_certificate(
    cert: &IncompatibilityCertificate,
    a: &LinearSpace,
    b1: &LinearSpace,
    b2: &LinearSpace,
) -> bool {
    let chain = &cert.chain;
    if chain.base != *a || !chain.verify() {
        return false;
    }
    let ai = &chain.result;
    let m = ai.n_points();
    if b1.n_points() <= m || b2.n_points() <= m {
        return false;
    }
    if b1.restrict_prefix(m) != *ai || b2.restrict_prefix(m) != *ai {
        return false;
    }
    let ls = [&cert.l1, &cert.l2, &cert.l3];
    if ls.iter().any(|l| !ai.is_line(l)) {
        return false;
    }
    if !disjoint(&cert.l1, &cert.l2)
        || !disjoint(&cert.l1, &cert.l3)
        || !disjoint(&cert.l2, &cert.l3)
    {
        return false;
    }
    let (ap, app) = (cert.a_prime, cert.a_dblprime);
    if ap < m || ap >= b1.n_points() || app < m || app >= b2.n_points() {
        return false;
    }
    let on =
        |s: &LinearSpace, l: &Line, p: Point| s.line_through_unchecked(l[0], l[1]).contains(&p);
    if !ls.iter().all(|l| on(b1, l, ap)) {
        return false;
    }
    if !on(b2, &cert.l1, app) || !on(b2, &cert.l2, app) {
        return false;
    }
    let (u, v) = cert.noncollinear_with;
    if !cert.l3.contains(&u) || !cert.l3.contains(&v) || u == v {
        return false;
    }
    !b2.collinear_unchecked(app, u, v)
}

/// Closedness: every two lines meet.
pub fn is_amalgamation_base(a: &LinearSpace) -> bool {
    a.is_closed()
}

/// Closed and non-degenerate, i.e. a projective plane.
pub fn is_amalgamation_base_literal(a: &LinearSpace) -> bool {
    a.is_closed() && !a.is_degenerate()
}

#[derive(Debug, Clone, Serialize)]
pub enum BaseVerdict {
    Base,
    NotBase {
        b1: LinearSpace,
        b2: LinearSpace,
        cert: Option<Box<IncompatibilityCertificate>>,
    },
    Inconclusive(String),
}

impl BaseVerdict {
    pub fn is_base(&self) -> Option<bool> {
        match self {
            BaseVerdict::Base => Some(true),
            BaseVerdict::NotBase { .. } => Some(false),
            BaseVerdict::Inconclusive(_) => None,
        }
    }
}

/// Pairs of one-point extensions of `a`, reduced modulo automorphisms.
pub fn extension_pairs(
    a: &LinearSpace,
    class: &ClassSpec,
) -> Result<Vec<(LinearSpace, LinearSpace)>, AmalgamError> {
    let exts: Vec<(Vec<Line>, LinearSpace)> = one_point_extensions(a, class.max_degree)
        .into_iter()
        .filter(|(_, e)| class.kind != ClassKind::P4Star || class.contains(e))
        .collect();
    let aut = automorphisms(a).map_err(EnumerateError::from)?;
    let image = |s: &[Point], fam: &[Line]| -> Vec<Line> {
        let mut v: Vec<Line> = fam
            .iter()
            .map(|l| {
                let mut m: Line = l.iter().map(|&p| s[p]).collect();
                m.sort_unstable();
                m
            })
            .collect();
        v.sort();
        v
    };
    let index: BTreeMap<Vec<Line>, usize> = exts
        .iter()
        .enumerate()
        .map(|(i, (f, _))| (f.clone(), i))
        .collect();
    let mut out = Vec::new();
    let mut seen1: HashSet<usize> = HashSet::new();
    for i in 0..exts.len() {
        if seen1.contains(&i) {
            continue;
        }
        let stab: Vec<&Vec<Point>> = aut
            .iter()
            .filter(|s| {
                let im = image(s, &exts[i].0);
                seen1.insert(index[&im]);
                im == exts[i].0
            })
            .collect();
        let mut seen2: HashSet<usize> = HashSet::new();
        for j in 0..exts.len() {
            if seen2.contains(&j) {
                continue;
            }
            for s in &stab {
                seen2.insert(index[&image(s, &exts[j].0)]);
            }
            out.push((exts[i].1.clone(), exts[j].1.clone()));
        }
    }
    Ok(out)
}

/// Decides whether `a` is an amalgamation base by search.
///
/// Every pair of one-point extensions (modulo automorphisms) is tested
/// with the exhaustive union search. Then trivial planarisations of depth
/// up to `extra_points` are explored; whenever three pairwise parallel
/// lines appear, the concurrent and trivial planarisations on them are
/// tested the same way. A pair without amalgam is returned as witness.
pub fn is_amalgamation_base_exhaustive(
    a: &LinearSpace,
    extra_points: usize,
) -> Result<BaseVerdict, AmalgamError> {
    let all = ClassSpec::all();
    let id: Vec<Point> = (0..a.n_points()).collect();
    for (b1, b2) in extension_pairs(a, &all)? {
        if find_amalgam(a, &b1, &id, &b2, &id, &all, DEFAULT_AMALGAM_BUDGET)?.is_none() {
            return Ok(BaseVerdict::NotBase { b1, b2, cert: None });
        }
    }
    if a.is_closed() {
        return Ok(BaseVerdict::Base);
    }
    let mut budget = 200_000u64;
    for depth in 0..=extra_points {
        let t = PlanarisationTrace::new(a.clone());
        if let Some(w) = probe(a, t, depth, &mut budget)? {
            return Ok(w);
        }
        if budget == 0 {
            break;
        }
    }
    Ok(BaseVerdict::Inconclusive(format!(
        "no incompatible pair found within {extra_points} trivial steps"
    )))
}

fn probe(
    a: &LinearSpace,
    t: PlanarisationTrace,
    depth: usize,
    budget: &mut u64,
) -> Result<Option<BaseVerdict>, AmalgamError> {
    if *budget == 0 {
        return Ok(None);
    }
    *budget -= 1;
    let s = &t.result;
    let all = s.all_lines();
    let par = s.parallel_pair_indices(&all);
    if depth == 0 {
        let pset: HashSet<(usize, usize)> = par.iter().copied().collect();
        for &(i, j) in &par {
            for k in j + 1..all.len() {
                if pset.contains(&(i, k)) && pset.contains(&(j, k)) {
                    let trio = [all[i].clone(), all[j].clone(), all[k].clone()];
                    if let Some(v) = clash(a, &t, &trio)? {
                        return Ok(Some(v));
                    }
                }
            }
        }
        return Ok(None);
    }
    for &(i, j) in &par {
        let mut next = t.clone();
        next.push(&[all[i].clone(), all[j].clone()])?;
        if let Some(v) = probe(a, next, depth - 1, budget)? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

fn clash(
    a: &LinearSpace,
    t: &PlanarisationTrace,
    trio: &[Line; 3],
) -> Result<Option<BaseVerdict>, AmalgamError> {
    let ai = &t.result;
    let b1 = concurrent_planarisation(ai, trio)?;
    let b2 = crate::planarise::trivial_planarisation(ai, &[(trio[0].clone(), trio[1].clone())])?;
    let id: Vec<Point> = (0..a.n_points()).collect();
    let found = find_amalgam(
        a,
        &b1,
        &id,
        &b2,
        &id,
        &ClassSpec::all(),
        DEFAULT_AMALGAM_BUDGET,
    )?;
    if found.is_some() {
        return Ok(None);
    }
    let m = ai.n_points();
    let cert = IncompatibilityCertificate {
        l1: trio[0].clone(),
        l2: trio[1].clone(),
        l3: trio[2].clone(),
        a_prime: m,
        a_dblprime: m,
        noncollinear_with: (trio[2][0], trio[2][1]),
        chain: t.clone(),
        case: if trio[0].len() == 2 && trio[1].len() == 2 {
            1
        } else {
            2
        },
    };
    let cert = verify_certificate(&cert, a, &b1, &b2).then(|| Box::new(cert));
    Ok(Some(BaseVerdict::NotBase { b1, b2, cert }))
}

#[derive(Debug, Clone, Serialize)]
pub struct ApFailure {
    pub base: LinearSpace,
    pub b1: LinearSpace,
    pub b2: LinearSpace,
    pub kind: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApReport {
    pub class: String,
    pub max_points: usize,
    pub bases: usize,
    pub instances: usize,
    pub multi_point_instances: usize,
    pub failures: Vec<ApFailure>,
    pub inconclusive: usize,
    pub moves: BTreeMap<String, usize>,
}

enum Outcome {
    Ok(String),
    Fail(ApFailure),
    Inconclusive,
}

/// Checks amalgamation of one-point extensions over every class member with
/// at most `max_points` points, plus a multi-point pass: certificate pairs
/// for the full class, seeded two-point extension pairs otherwise.
pub fn verify_class_ap(
    class: &ClassSpec,
    max_points: usize,
    jobs: usize,
    seed: u64,
) -> Result<ApReport, AmalgamError> {
    let levels = enumerate_levels(max_points, class)?;
    let bases: Vec<LinearSpace> = levels.into_iter().flatten().collect();
    let mut tasks: Vec<(usize, LinearSpace, LinearSpace)> = Vec::new();
    for (bi, base) in bases.iter().enumerate() {
        for (b1, b2) in extension_pairs(base, class)? {
            if class.contains(&b1) && class.contains(&b2) {
                tasks.push((bi, b1, b2));
            }
        }
    }
    let run = |(bi, b1, b2): &(usize, LinearSpace, LinearSpace)| -> Outcome {
        let base = &bases[*bi];
        match amalgamate_in_class(base, b1, b2, class) {
            Ok(Some(r)) => Outcome::Ok(move_name(&r.how)),
            Ok(None) => Outcome::Fail(ApFailure {
                base: base.clone(),
                b1: b1.clone(),
                b2: b2.clone(),
                kind: "one-point",
            }),
            Err(_) => Outcome::Inconclusive,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| AmalgamError::Construction(e.to_string()))?;
    let outcomes: Vec<Outcome> = pool.install(|| tasks.par_iter().map(run).collect());

    let multi = multi_point_tasks(class, &bases, seed)?;
    let run_multi = |(bi, b1, b2): &(usize, LinearSpace, LinearSpace)| -> Outcome {
        let base = &bases[*bi];
        let id: Vec<Point> = (0..base.n_points()).collect();
        match find_amalgam(base, b1, &id, b2, &id, class, DEFAULT_AMALGAM_BUDGET) {
            Ok(Some(_)) => Outcome::Ok("multi-point".into()),
            Ok(None) => Outcome::Fail(ApFailure {
                base: base.clone(),
                b1: b1.clone(),
                b2: b2.clone(),
                kind: "multi-point",
            }),
            Err(_) => Outcome::Inconclusive,
        }
    };
    let multi_out: Vec<Outcome> = pool.install(|| multi.par_iter().map(run_multi).collect());

    let mut report = ApReport {
        class: class.name(),
        max_points,
        bases: bases.len(),
        instances: tasks.len(),
        multi_point_instances: multi.len(),
        failures: Vec::new(),
        inconclusive: 0,
        moves: BTreeMap::new(),
    };
    for o in outcomes.into_iter().chain(multi_out) {
        match o {
            Outcome::Ok(m) => *report.moves.entry(m).or_default() += 1,
            Outcome::Fail(f) => report.failures.push(f),
            Outcome::Inconclusive => report.inconclusive += 1,
        }
    }
    Ok(report)
}

fn move_name(m: &AmalgamMove) -> String {
    match m {
        AmalgamMove::Identify => "identify".into(),
        AmalgamMove::FreeUnion => "free-union".into(),
        AmalgamMove::DeclaredTriple(_) => "declared-triple".into(),
        AmalgamMove::Search => "search".into(),
    }
}

const SAMPLES_PER_BASE: usize = 3;

fn multi_point_tasks(
    class: &ClassSpec,
    bases: &[LinearSpace],
    seed: u64,
) -> Result<Vec<(usize, LinearSpace, LinearSpace)>, AmalgamError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut out = Vec::new();
    if class.kind == ClassKind::All {
        for (bi, base) in bases.iter().enumerate() {
            if !base.is_closed() {
                let p = incompatible_planarisations(base)?;
                out.push((bi, p.b1, p.b2));
            }
        }
        return Ok(out);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let in_class = |s: &LinearSpace| -> Vec<LinearSpace> {
        one_point_extensions(s, class.max_degree)
            .into_iter()
            .map(|(_, e)| e)
            .filter(|e| class.contains(e))
            .collect()
    };
    for (bi, base) in bases.iter().enumerate() {
        let first = in_class(base);
        if first.is_empty() {
            continue;
        }
        for _ in 0..SAMPLES_PER_BASE {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| -> Option<LinearSpace> {
                let e = first.choose(rng)?;
                in_class(e).choose(rng).cloned()
            };
            if let (Some(b1), Some(b2)) = (pick(&mut rng), pick(&mut rng)) {
                out.push((bi, b1, b2));
            }
        }
    }
    Ok(out)
}
