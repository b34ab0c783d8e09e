//! A finite extension game: two strategies alternately add one point to a
//! linear space, and the resulting chain is analysed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::morphisms::for_each_subset;
use crate::planarise::{elementary_planarisation, planar_closure};
use crate::space::{disjoint, Line, LinearSpace, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("strategy {strategy} returned an invalid extension in round {round}: {reason}")]
    StrategyReturnedInvalidExtension {
        strategy: String,
        round: usize,
        reason: String,
    },
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameState {
    pub current: LinearSpace,
    pub history: Vec<LinearSpace>,
    pub round: usize,
    pub rng_seed: u64,
}

impl GameState {
    pub fn new(start: LinearSpace, seed: u64) -> Self {
        GameState {
            current: start.clone(),
            history: vec![start],
            round: 0,
            rng_seed: seed,
        }
    }
}

/// A player. A move returns a one-point extension of `state.current`
/// whose first `n` points induce `current` exactly.
pub trait Strategy: Sync {
    fn name(&self) -> &str;
    fn play(&self, state: &GameState, rng: &mut ChaCha8Rng) -> LinearSpace;
}

/// Adds a point on no nontrivial line.
pub struct FreePoint;

impl Strategy for FreePoint {
    fn name(&self) -> &str {
        "free_point"
    }
    fn play(&self, state: &GameState, _: &mut ChaCha8Rng) -> LinearSpace {
        state.current.with_free_points(1)
    }
}

/// Adds a point that is either free or extends one trivial line, chosen
/// uniformly among these options.
pub struct RandomExtension;

impl Strategy for RandomExtension {
    fn name(&self) -> &str {
        "random_extension"
    }
    fn play(&self, state: &GameState, rng: &mut ChaCha8Rng) -> LinearSpace {
        let s = &state.current;
        let trivial: Vec<Line> = s.all_lines().into_iter().filter(|l| l.len() == 2).collect();
        let k = rng.gen_range(0..=trivial.len());
        if k == trivial.len() {
            return s.with_free_points(1);
        }
        let mut lines = s.lines().to_vec();
        let mut l = trivial[k].clone();
        l.push(s.n_points());
        lines.push(l);
        LinearSpace::from_lines_trusted(s.n_points() + 1, lines)
    }
}

/// Meets the least unresolved parallel pair, or plays a free point.
///
/// A line keeps its two smallest points forever, so a pair of lines is
/// keyed by those four points. Pairs are ordered by the largest of the
/// four, then lexicographically, which makes every pair eventually first.
pub struct ClosureStrategy;

impl Strategy for ClosureStrategy {
    fn name(&self) -> &str {
        "closure_strategy"
    }
    fn play(&self, state: &GameState, _: &mut ChaCha8Rng) -> LinearSpace {
        let s = &state.current;
        match least_parallel_pair(s) {
            Some((l1, l2)) => {
                elementary_planarisation(s, &l1, &l2)
                    .expect("pair is parallel")
                    .0
            }
            None => s.with_free_points(1),
        }
    }
}

/// Identity of a line pair that survives extensions.
pub type PairKey = ((Point, Point), (Point, Point));

fn key_of(l1: &[Point], l2: &[Point]) -> PairKey {
    let (a, b) = ((l1[0], l1[1]), (l2[0], l2[1]));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn order(k: &PairKey) -> (Point, PairKey) {
    let ((a, b), (c, d)) = *k;
    (a.max(b).max(c).max(d), *k)
}

/// The parallel pair chosen by [`ClosureStrategy`].
pub fn least_parallel_pair(s: &LinearSpace) -> Option<(Line, Line)> {
    let all = s.all_lines();
    s.parallel_pair_indices(&all)
        .into_iter()
        .min_by_key(|&(i, j)| order(&key_of(&all[i], &all[j])))
        .map(|(i, j)| (all[i].clone(), all[j].clone()))
}

pub fn builtin_strategies() -> Vec<Box<dyn Strategy>> {
    vec![
        Box::new(FreePoint),
        Box::new(RandomExtension),
        Box::new(ClosureStrategy),
    ]
}

pub fn strategy_by_name(name: &str) -> Result<Box<dyn Strategy>, GameError> {
    builtin_strategies()
        .into_iter()
        .find(|s| s.name() == name || s.name().replace('_', "-") == name)
        .ok_or_else(|| GameError::UnknownStrategy(name.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub round: usize,
    pub player: Option<String>,
    pub points: usize,
    pub lines: usize,
    pub degree: usize,
    pub parallel_pairs: usize,
}

/// Fate of a line pair parallel at some round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairFate {
    pub key: PairKey,
    pub parallel_from: usize,
    pub resolved_at: Option<usize>,
}

/// For each subset of at most `k` points, whether its planar closure
/// induces a closed subspace. This is a sufficient test for lying in a
/// closed induced subspace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalClosureProbe {
    pub k: usize,
    pub subsets: usize,
    pub closed_closures: usize,
    pub final_closed: bool,
    pub all_contained: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameReport {
    pub state: GameState,
    pub rounds: Vec<RoundStats>,
    pub pairs: Vec<PairFate>,
    pub probe: LocalClosureProbe,
}

pub const DEFAULT_PROBE_SIZE: usize = 3;

/// Plays `rounds` moves, `s1` on even rounds and `s2` on odd ones.
pub fn play(
    start: LinearSpace,
    s1: &dyn Strategy,
    s2: &dyn Strategy,
    rounds: usize,
    seed: u64,
) -> Result<GameState, GameError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GameState::new(start, seed);
    for r in 0..rounds {
        let player = if r % 2 == 0 { s1 } else { s2 };
        let next = player.play(&state, &mut rng);
        let n = state.current.n_points();
        let bad = |reason: &str| GameError::StrategyReturnedInvalidExtension {
            strategy: player.name().to_string(),
            round: r + 1,
            reason: reason.to_string(),
        };
        if next.n_points() != n + 1 {
            return Err(bad("not a one-point extension"));
        }
        if next.restrict_prefix(n) != state.current {
            return Err(bad("does not restrict to the current space"));
        }
        state.history.push(next.clone());
        state.current = next;
        state.round = r + 1;
    }
    Ok(state)
}

/// [`play`] followed by [`analyse`].
pub fn play_and_analyse(
    start: LinearSpace,
    s1: &dyn Strategy,
    s2: &dyn Strategy,
    rounds: usize,
    seed: u64,
    probe_size: usize,
) -> Result<GameReport, GameError> {
    let state = play(start, s1, s2, rounds, seed)?;
    Ok(analyse(state, &[s1.name(), s2.name()], probe_size))
}

pub fn analyse(state: GameState, players: &[&str; 2], probe_size: usize) -> GameReport {
    let rounds = state
        .history
        .iter()
        .enumerate()
        .map(|(r, s)| RoundStats {
            round: r,
            player: (r > 0).then(|| players[(r - 1) % 2].to_string()),
            points: s.n_points(),
            lines: s.line_count(),
            degree: s.degree(),
            parallel_pairs: s.parallel_pair_count(),
        })
        .collect();
    let pairs = pair_fates(&state.history);
    let probe = local_closure_probe(&state.current, probe_size);
    GameReport {
        state,
        rounds,
        pairs,
        probe,
    }
}

/// Every pair parallel in some chain element, with the round it was first
/// parallel and the first later round in which it meets.
pub fn pair_fates(history: &[LinearSpace]) -> Vec<PairFate> {
    let mut fates: Vec<PairFate> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for (r, s) in history.iter().enumerate() {
        open.retain(|&i| {
            let ((a, b), (c, d)) = fates[i].key;
            if disjoint(
                &s.line_through_unchecked(a, b),
                &s.line_through_unchecked(c, d),
            ) {
                true
            } else {
                fates[i].resolved_at = Some(r);
                false
            }
        });
        let all = s.all_lines();
        for (i, j) in s.parallel_pair_indices(&all) {
            let key = key_of(&all[i], &all[j]);
            if !open.iter().any(|&o| fates[o].key == key) {
                open.push(fates.len());
                fates.push(PairFate {
                    key,
                    parallel_from: r,
                    resolved_at: None,
                });
            }
        }
    }
    fates
}

pub fn local_closure_probe(s: &LinearSpace, k: usize) -> LocalClosureProbe {
    let final_closed = s.is_closed();
    let (mut subsets, mut closed_closures) = (0, 0);
    for size in 1..=k.min(s.n_points()) {
        for_each_subset(s.n_points(), size, &mut |sub: &[Point]| {
            subsets += 1;
            let c = planar_closure(sub, s).expect("points in range");
            if s.induced(&c).is_closed() {
                closed_closures += 1;
            }
            true
        });
    }
    LocalClosureProbe {
        k,
        subsets,
        closed_closures,
        final_closed,
        all_contained: final_closed || closed_closures == subsets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::named::*;

    #[test]
    fn zero_rounds() {
        let g = play(quadrilateral(), &FreePoint, &FreePoint, 0, 1).unwrap();
        assert_eq!(g.current, quadrilateral());
        assert_eq!(g.round, 0);
    }

    #[test]
    fn builtins_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let st = GameState::new(LinearSpace::trivial(2), 0);
        assert_eq!(FreePoint.play(&st, &mut rng), LinearSpace::trivial(3));

        let st = GameState::new(quadrilateral(), 0);
        let b = ClosureStrategy.play(&st, &mut rng);
        assert_eq!(b.n_points(), 5);
        assert_eq!(b.line_through(0, 1).unwrap(), vec![0, 1, 4]);
        assert_eq!(b.line_through(2, 3).unwrap(), vec![2, 3, 4]);

        let st = GameState::new(fano(), 0);
        assert_eq!(
            ClosureStrategy.play(&st, &mut rng),
            fano().with_free_points(1)
        );
    }

    #[test]
    fn closure_game_on_quadrilateral() {
        let g = play(quadrilateral(), &ClosureStrategy, &ClosureStrategy, 3, 0).unwrap();
        for w in g.history.windows(2) {
            assert_eq!(w[1].n_points(), w[0].n_points() + 1);
            assert_eq!(w[1].restrict_prefix(w[0].n_points()), w[0]);
        }
        let fates = pair_fates(&g.history);
        let initial: Vec<_> = fates.iter().filter(|f| f.parallel_from == 0).collect();
        assert_eq!(initial.len(), 3);
        assert!(initial
            .iter()
            .all(|f| f.resolved_at.is_some_and(|r| r <= 3)));
    }

    #[test]
    fn replay_is_deterministic() {
        let a = play(triangle(), &RandomExtension, &ClosureStrategy, 8, 42).unwrap();
        let b = play(triangle(), &RandomExtension, &ClosureStrategy, 8, 42).unwrap();
        assert_eq!(a, b);
    }

    struct Broken;
    impl Strategy for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn play(&self, _: &GameState, _: &mut ChaCha8Rng) -> LinearSpace {
            LinearSpace::trivial(1)
        }
    }

    #[test]
    fn invalid_moves_are_reported() {
        let e = play(triangle(), &FreePoint, &Broken, 3, 0).unwrap_err();
        assert_eq!(
            e,
            GameError::StrategyReturnedInvalidExtension {
                strategy: "broken".into(),
                round: 2,
                reason: "not a one-point extension".into(),
            }
        );
    }

    #[test]
    fn probe_on_fano() {
        let p = local_closure_probe(&fano(), 3);
        assert!(p.final_closed && p.all_contained);
        assert_eq!(p.subsets, 7 + 21 + 35);
        assert!(strategy_by_name("closure-strategy").is_ok());
        assert!(strategy_by_name("nope").is_err());
    }
}
