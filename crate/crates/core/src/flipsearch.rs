//! Rank-reducing random walks over correct schemes.
//!
//! Over characteristic 2, two products sharing a mask can trade mass:
//!
//! ```text
//! x⊗y_k⊗z_k + x⊗y_l⊗z_l = x⊗y_k⊗(z_k + z_l) + x⊗(y_k + y_l)⊗z_l
//! ```
//!
//! Such a flip keeps the scheme correct and the rank unchanged, but it can
//! make two products agree on two sides (or zero out a mask), at which
//! point [`reduce_if_possible`] removes a multiplication.

use std::fmt;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::scheme::{normalize_products, Scheme, Side};
use crate::verifier::verify;

/// Which of the two non-shared sides of the first product absorbs the sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Direction {
    /// The next side after the shared one (cyclically) of product `k`.
    Forward,
    /// The side after that.
    Backward,
}

/// A flip between products `k` and `l` that agree on `shared`.
///
/// With `(s1, s2)` the remaining sides in cyclic order, `Forward` adds
/// `l`'s `s2` mask into `k`'s `s2` and `k`'s `s1` mask into `l`'s `s1`;
/// `Backward` swaps the roles of `s1` and `s2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FlipMove {
    pub k: usize,
    pub l: usize,
    pub shared: Side,
    pub direction: Direction,
}

impl fmt::Display for FlipMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flip(m{}, m{}, shared={}, {:?})", self.k + 1, self.l + 1, self.shared, self.direction)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlipError {
    #[error("products m{} and m{} do not share their {shared} mask", k + 1, l + 1)]
    Inapplicable { k: usize, l: usize, shared: Side },
    #[error("product index out of range or k == l")]
    BadIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("start scheme fails verification")]
    UnverifiedStart,
    #[error("no seeds given")]
    NoSeeds,
}

fn applicable(s: &Scheme, mv: &FlipMove) -> Result<(), FlipError> {
    let prods = s.products();
    if mv.k == mv.l || mv.k >= prods.len() || mv.l >= prods.len() {
        return Err(FlipError::BadIndex);
    }
    if prods[mv.k].mask(mv.shared) != prods[mv.l].mask(mv.shared) {
        return Err(FlipError::Inapplicable { k: mv.k, l: mv.l, shared: mv.shared });
    }
    Ok(())
}

/// Applies one flip. The rank is unchanged; correctness is preserved.
/// An inapplicable move leaves `s` untouched and reports why.
pub fn flip_in_place(s: &mut Scheme, mv: &FlipMove) -> Result<(), FlipError> {
    applicable(s, mv)?;
    let (s1, s2) = mv.shared.others();
    let (grow_k, grow_l) = match mv.direction {
        Direction::Forward => (s2, s1),
        Direction::Backward => (s1, s2),
    };
    let prods = s.products_mut();
    let from_l = prods[mv.l].mask(grow_k).clone();
    let from_k = prods[mv.k].mask(grow_l).clone();
    prods[mv.k].mask_mut(grow_k).add_assign(&from_l).expect("same side, same shape");
    prods[mv.l].mask_mut(grow_l).add_assign(&from_k).expect("same side, same shape");
    Ok(())
}

/// Functional form of [`flip_in_place`]: on an inapplicable move the error
/// carries the unchanged input back.
pub fn flip(s: &Scheme, mv: &FlipMove) -> Result<Scheme, (FlipError, Scheme)> {
    let mut out = s.clone();
    match flip_in_place(&mut out, mv) {
        Ok(()) => Ok(out),
        Err(e) => Err((e, out)),
    }
}

/// Every applicable move: unordered pairs `k < l`, then shared side, then
/// direction.
pub fn find_moves(s: &Scheme) -> Vec<FlipMove> {
    let prods = s.products();
    let mut out = Vec::new();
    for k in 0..prods.len() {
        for l in k + 1..prods.len() {
            for shared in Side::ALL {
                if prods[k].mask(shared) == prods[l].mask(shared) {
                    for direction in [Direction::Forward, Direction::Backward] {
                        out.push(FlipMove { k, l, shared, direction });
                    }
                }
            }
        }
    }
    out
}

/// Normalizes: zero masks are dropped and products agreeing on two sides
/// are merged. The rank is strictly smaller iff some reduction applied.
pub fn reduce_if_possible(s: &Scheme) -> Scheme {
    s.normalize()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Total flips allowed across all restarts.
    pub budget: u64,
    /// Stop once the best scheme has at most this rank.
    pub target_rank: usize,
    pub seed: u64,
    /// Number of walk segments; each is capped at `step_cap` flips and
    /// starts over from the start scheme.
    pub restarts: u64,
    /// Per-restart flip cap; `budget / restarts` when `None`.
    pub step_cap: Option<u64>,
}

impl SearchConfig {
    pub fn new(budget: u64, target_rank: usize, seed: u64, restarts: u64) -> Self {
        Self { budget, target_rank, seed, restarts, step_cap: None }
    }

    fn cap(&self) -> u64 {
        self.step_cap.unwrap_or_else(|| (self.budget / self.restarts.max(1)).max(1))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub steps: u64,
    pub reductions: u64,
    pub restarts: u64,
    pub start_rank: usize,
    pub best_rank: usize,
    /// Step at which the best scheme was first reached.
    pub best_step: u64,
    /// Times the walk hit a scheme without any applicable flip.
    pub dead_ends: u64,
    pub reached_target: bool,
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps={}", self.steps)?;
        writeln!(f, "reductions={}", self.reductions)?;
        writeln!(f, "restarts={}", self.restarts)?;
        writeln!(f, "dead_ends={}", self.dead_ends)?;
        writeln!(f, "start_rank={}", self.start_rank)?;
        writeln!(f, "best_rank={}", self.best_rank)?;
        writeln!(f, "best_step={}", self.best_step)?;
        writeln!(f, "reached_target={}", self.reached_target)
    }
}

/// Walk state: the current and best schemes plus the random stream.
pub struct SearchState {
    pub current: Scheme,
    pub best: Scheme,
    pub stats: SearchStats,
    rng: ChaCha8Rng,
}

impl SearchState {
    pub fn new(start: Scheme, seed: u64) -> Result<Self, SearchError> {
        if !verify(&start) {
            return Err(SearchError::UnverifiedStart);
        }
        let rank = start.rank();
        Ok(Self {
            best: start.clone(),
            current: start,
            stats: SearchStats { start_rank: rank, best_rank: rank, ..Default::default() },
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// One uniformly chosen flip followed by reduction. Returns `false`
    /// if no flip applies.
    pub fn step(&mut self) -> bool {
        let moves = find_moves(&self.current);
        if moves.is_empty() {
            return false;
        }
        let mv = moves[self.rng.gen_range(0..moves.len())];
        flip_in_place(&mut self.current, &mv).expect("enumerated moves apply");
        self.stats.steps += 1;
        if normalize_products(self.current.products_mut()) > 0 {
            self.stats.reductions += 1;
        }
        debug_assert!(verify(&self.current), "flip broke correctness");
        if self.current.rank() < self.best.rank() {
            self.best = self.current.clone();
            self.stats.best_rank = self.best.rank();
            self.stats.best_step = self.stats.steps;
        }
        true
    }
}

/// Random flip walk with restarts.
///
/// Each step picks a uniformly random applicable flip, applies it and
/// reduces. After `config.cap()` steps (or at a dead end) the walk starts
/// over from `start`. Stops when the best rank reaches the target or the
/// budget is spent. Deterministic per seed; ties keep the earliest best.
pub fn random_walk(start: &Scheme, config: &SearchConfig) -> Result<(Scheme, SearchStats), SearchError> {
    let mut state = SearchState::new(start.clone(), config.seed)?;
    let origin = state.current.clone();
    let cap = config.cap();
    let origin_has_moves = !find_moves(&origin).is_empty();
    let mut segment = 0u64;
    while state.best.rank() > config.target_rank && state.stats.steps < config.budget {
        if segment >= cap {
            state.current = origin.clone();
            state.stats.restarts += 1;
            segment = 0;
        }
        if state.step() {
            segment += 1;
            continue;
        }
        state.stats.dead_ends += 1;
        if !origin_has_moves {
            break;
        }
        segment = cap;
    }
    state.stats.reached_target = state.best.rank() <= config.target_rank;
    Ok((state.best, state.stats))
}

/// Runs one walk per seed on separate threads and keeps the best result by
/// `(rank, position in seeds)`.
pub fn best_of_walks(
    start: &Scheme,
    config: &SearchConfig,
    seeds: &[u64],
) -> Result<(Scheme, SearchStats, u64), SearchError> {
    if !verify(start) {
        return Err(SearchError::UnverifiedStart);
    }
    let results: Vec<_> = thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let cfg = SearchConfig { seed, ..config.clone() };
                scope.spawn(move || random_walk(start, &cfg).map(|(s, st)| (s, st, seed)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("walk thread panicked")).collect()
    });
    let mut best: Option<(Scheme, SearchStats, u64)> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.0.rank() < b.0.rank()) {
            best = Some(r);
        }
    }
    best.ok_or(SearchError::NoSeeds)
}
