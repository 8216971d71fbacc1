//! Round-synchronized greedy over a vertex partition.
//!
//! Each round runs three barrier-separated phases over the workers:
//! spans and keys for owned vertices, the hop-1 maximum of keys, and the
//! hop-2 maximum with the admission decision. Coloring is applied after the
//! last barrier, so no decision depends on the order workers run in.

use alloc::vec::Vec;
use core::sync::atomic::Ordering::Relaxed;
use core::sync::atomic::{AtomicU32, AtomicU64, AtomicU8};

use super::{DominatingSet, MdsError};
use crate::exec::Executor;
use crate::graph::Graph;

/// Vertex ownership: worker `w` is responsible for `vertices_of(w)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    lists: Vec<Vec<u32>>,
    n: usize,
}

impl Partition {
    /// Validates that `lists` assigns each of `0..n` to exactly one worker.
    pub fn from_lists(n: usize, mut lists: Vec<Vec<u32>>) -> Result<Self, MdsError> {
        if lists.is_empty() {
            return Err(MdsError::NoWorkers);
        }
        let mut seen = alloc::vec![false; n];
        for list in &mut lists {
            list.sort_unstable();
            for &v in list.iter() {
                let slot = seen
                    .get_mut(v as usize)
                    .ok_or(MdsError::VertexOutOfRange { vertex: v, n })?;
                if *slot {
                    return Err(MdsError::PartitionOverlap(v));
                }
                *slot = true;
            }
        }
        let gap: Vec<u32> = (0..n as u32).filter(|&v| !seen[v as usize]).collect();
        if !gap.is_empty() {
            return Err(MdsError::PartitionGap(gap));
        }
        Ok(Self { lists, n })
    }

    /// Consecutive id ranges whose sizes differ by at most one; earlier
    /// workers take the extra vertex.
    pub fn contiguous(n: usize, workers: usize) -> Self {
        let workers = workers.max(1);
        let (base, extra) = (n / workers, n % workers);
        let mut start = 0u32;
        let lists = (0..workers)
            .map(|w| {
                let len = (base + usize::from(w < extra)) as u32;
                let list: Vec<u32> = (start..start + len).collect();
                start += len;
                list
            })
            .collect();
        Self { lists, n }
    }

    /// Longest-processing-time assignment with vertex degree as the load:
    /// vertices in decreasing degree order go to the currently lightest
    /// worker (lowest index on ties).
    pub fn degree_balanced(g: &Graph, workers: usize) -> Self {
        let workers = workers.max(1);
        let mut order: Vec<u32> = (0..g.n() as u32).collect();
        order.sort_by_key(|&v| (core::cmp::Reverse(g.degree(v)), v));
        let mut load = alloc::vec![0usize; workers];
        let mut lists = alloc::vec![Vec::new(); workers];
        for v in order {
            let w = (0..workers).min_by_key(|&w| (load[w], w)).expect("workers >= 1");
            load[w] += g.degree(v);
            lists[w].push(v);
        }
        for list in &mut lists {
            list.sort_unstable();
        }
        Self { lists, n: g.n() }
    }

    pub fn workers(&self) -> usize {
        self.lists.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices_of(&self, worker: usize) -> &[u32] {
        &self.lists[worker]
    }

    pub fn owner_table(&self) -> Vec<u32> {
        let mut owner = alloc::vec![0u32; self.n];
        for (w, list) in self.lists.iter().enumerate() {
            for &v in list {
                owner[v as usize] = w as u32;
            }
        }
        owner
    }
}

/// One worker's contribution to one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundReport {
    pub round: u32,
    pub worker: u32,
    /// False when the worker stayed silent and the coordinator recomputed
    /// its share.
    pub responded: bool,
    /// Owned vertices whose positive span was reported this round.
    pub spans_reported: u32,
    /// Owned vertices admitted to the set this round.
    pub admitted: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundStats {
    pub round: u32,
    pub white_before: u64,
    pub admitted: u64,
}

#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub set: DominatingSet,
    pub rounds: u32,
    pub reports: Vec<RoundReport>,
    pub stats: Vec<RoundStats>,
    /// False when `keep_going` stopped the run early; the remaining white
    /// vertices were then added to the set so it still dominates.
    pub completed: bool,
}

pub fn greedy_distributed<E: Executor>(
    g: &Graph,
    partition: &Partition,
    exec: &E,
) -> Result<DistributedRun, MdsError> {
    greedy_distributed_with(g, partition, exec, |_, _| true, |_| true)
}

/// Full form. `responds(round, worker)` decides whether a worker answers in
/// a round; `keep_going(round)` is polled before each round starts.
///
/// Every vertex `x` tracks which closed neighbor holds the largest key it has
/// heard (`hop1_from`). A vertex beats its whole hop-2 ball exactly when it
/// holds that role for all of its closed neighbors, so relays forward only
/// changes of holder as claim counts. Rounds are incremental: spans never
/// grow, keys only fall, and a relay recomputes only when its holder's key
/// changed. The outcome equals recomputing every maximum from scratch.
pub fn greedy_distributed_with<E, R, K>(
    g: &Graph,
    partition: &Partition,
    exec: &E,
    responds: R,
    mut keep_going: K,
) -> Result<DistributedRun, MdsError>
where
    E: Executor,
    R: Fn(u32, u32) -> bool + Sync,
    K: FnMut(u32) -> bool,
{
    let n = g.n();
    if partition.n() != n {
        return Err(MdsError::SizeMismatch { set_n: partition.n(), graph_n: n });
    }
    let workers = partition.workers();
    let atomics32 = |init: u32| -> Vec<AtomicU32> { (0..n).map(|_| AtomicU32::new(init)).collect() };
    let color: Vec<AtomicU8> = (0..n).map(|_| AtomicU8::new(WHITE)).collect();
    let span: Vec<AtomicU32> =
        (0..n as u32).map(|v| AtomicU32::new(g.degree(v) as u32 + 1)).collect();
    let key: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(0)).collect();
    let hop1_from = atomics32(NONE);
    // Number of closed neighbors whose largest heard key is this vertex's.
    let claims = atomics32(0);
    // Round in which a key or a relay was last invalidated, and in which a
    // vertex last completed its claims.
    let key_dirty = atomics32(1);
    let relay_dirty = atomics32(1);
    let claimed_full = atomics32(0);
    let closed = |v: u32| core::iter::once(v).chain(g.neighbors(v).iter().copied());

    let mut candidates: Vec<Vec<u32>> = partition.lists.clone();
    let mut relays: Vec<Vec<u32>> = partition.lists.clone();
    let mut white = n as u64;
    let mut picked = Vec::new();
    let mut reports = Vec::new();
    let mut stats = Vec::new();
    let mut round = 0u32;
    let mut completed = true;

    while white > 0 {
        if !keep_going(round + 1) {
            completed = false;
            break;
        }
        round += 1;
        let r = round;
        let silent: Vec<bool> = (0..workers).map(|w| !responds(r, w as u32)).collect();

        // Owners turn changed spans into keys and report them.
        let keyed = phase(exec, &silent, &|w| {
            let mut live = Vec::with_capacity(candidates[w].len());
            let mut sent = Vec::new();
            for &v in &candidates[w] {
                if key_dirty[v as usize].load(Relaxed) == r {
                    let s = u64::from(span[v as usize].load(Relaxed));
                    let k = if s == 0 { 0 } else { (s << 32) | u64::from(u32::MAX - v) };
                    key[v as usize].store(k, Relaxed);
                    sent.push(v);
                }
                if key[v as usize].load(Relaxed) > 0 {
                    live.push(v);
                }
            }
            (live, sent)
        });

        // Send to N(v): relays holding v's old key must look again.
        phase(exec, &silent, &|w| {
            for &c in &keyed[w].1 {
                for x in closed(c) {
                    if hop1_from[x as usize].load(Relaxed) == c {
                        relay_dirty[x as usize].store(r, Relaxed);
                    }
                }
            }
        });

        // Relays pick their new holder and move the claim; this is the
        // second hop of the exchange.
        let next_relays = phase(exec, &silent, &|w| {
            let mut keep = Vec::with_capacity(relays[w].len());
            for &x in &relays[w] {
                let mut from = hop1_from[x as usize].load(Relaxed);
                if relay_dirty[x as usize].load(Relaxed) == r {
                    let old = from;
                    from = argmax_key(closed(x), &key);
                    if from != old {
                        hop1_from[x as usize].store(from, Relaxed);
                        if old != NONE {
                            claims[old as usize].fetch_sub(1, Relaxed);
                        }
                        if from != NONE {
                            let now = claims[from as usize].fetch_add(1, Relaxed) + 1;
                            if now as usize == g.degree(from) + 1 {
                                claimed_full[from as usize].store(r, Relaxed);
                            }
                        }
                    }
                }
                if from != NONE {
                    keep.push(x);
                }
            }
            keep
        });

        let admitted = phase(exec, &silent, &|w| {
            keyed[w]
                .0
                .iter()
                .copied()
                .filter(|&v| {
                    claimed_full[v as usize].load(Relaxed) == r
                        && claims[v as usize].load(Relaxed) as usize == g.degree(v) + 1
                })
                .collect::<Vec<u32>>()
        });

        // Barrier: color. Admitted vertices are pairwise at distance >= 3,
        // so their closed neighborhoods never overlap.
        let newly_covered = phase(exec, &silent, &|w| {
            let mut covered = 0u64;
            for &v in &admitted[w] {
                for u in closed(v) {
                    if color[u as usize].load(Relaxed) == WHITE {
                        color[u as usize].store(GREY, Relaxed);
                        covered += 1;
                        for x in closed(u) {
                            span[x as usize].fetch_sub(1, Relaxed);
                            key_dirty[x as usize].store(r + 1, Relaxed);
                        }
                    }
                }
                color[v as usize].store(BLACK, Relaxed);
            }
            covered
        });

        let white_before = white;
        let mut round_admitted = 0u64;
        for w in 0..workers {
            reports.push(RoundReport {
                round,
                worker: w as u32,
                responded: !silent[w],
                spans_reported: keyed[w].1.len() as u32,
                admitted: admitted[w].len() as u32,
            });
            round_admitted += admitted[w].len() as u64;
            white -= newly_covered[w];
            picked.extend_from_slice(&admitted[w]);
        }
        stats.push(RoundStats { round, white_before, admitted: round_admitted });
        candidates = keyed.into_iter().map(|(live, _)| live).collect();
        relays = next_relays;
    }

    if !completed {
        picked.extend((0..n as u32).filter(|&v| color[v as usize].load(Relaxed) == WHITE));
    }
    let set = DominatingSet::new(picked, n).expect("admitted vertices are distinct");
    Ok(DistributedRun { set, rounds: round, reports, stats, completed })
}

const WHITE: u8 = 0;
const GREY: u8 = 1;
const BLACK: u8 = 2;
const NONE: u32 = u32::MAX;

/// Runs one barrier phase. A silent worker's share is redone by the
/// coordinator; phases are idempotent, so the outcome does not change.
fn phase<E: Executor, T: Send>(
    exec: &E,
    silent: &[bool],
    f: &(dyn Fn(usize) -> T + Sync),
) -> Vec<T> {
    let mut out = exec.run(silent.len(), |w| if silent[w] { None } else { Some(f(w)) });
    out.iter_mut().enumerate().map(|(w, r)| r.take().unwrap_or_else(|| f(w))).collect()
}

fn argmax_key(vertices: impl Iterator<Item = u32>, key: &[AtomicU64]) -> u32 {
    let (best, from) = vertices.fold((0u64, NONE), |(best, from), x| {
        let k = key[x as usize].load(Relaxed);
        if k > best {
            (k, x)
        } else {
            (best, from)
        }
    });
    if best == 0 {
        NONE
    } else {
        from
    }
}

#[cfg(test)]
mod tests {
    use super::super::{brute_force_mds, greedy_sequential, is_dominating};
    use super::*;
    use crate::exec::Sequential;
    use crate::graph::{cycle, empty, generate_ba, generate_er, star};
    use alloc::vec;
    use proptest::prelude::*;

    fn solve(g: &Graph, workers: usize) -> DistributedRun {
        greedy_distributed(g, &Partition::contiguous(g.n(), workers), &Sequential).unwrap()
    }

    #[test]
    fn cycle6_trace() {
        // All spans are 3. Round 1 admits only 0: vertex 3 sees 1 and 5 at
        // hop 2, both beating it on id. Round 2 admits 3.
        let run = solve(&cycle(6), 1);
        assert_eq!(run.set.vertices(), &[0, 3]);
        assert_eq!(run.rounds, 2);
        assert_eq!(run.stats[0].admitted, 1);
        assert_eq!(brute_force_mds(&cycle(6)).unwrap().len(), 2);
    }

    #[test]
    fn star_finishes_in_one_round() {
        let run = solve(&star(5), 2);
        assert_eq!(run.set.vertices(), &[0]);
        assert_eq!(run.rounds, 1);
    }

    #[test]
    fn isolated_vertices_join_in_round_one() {
        let run = solve(&empty(4), 2);
        assert_eq!(run.set.vertices(), &[0, 1, 2, 3]);
        assert_eq!(run.rounds, 1);
    }

    #[test]
    fn partition_validation() {
        assert_eq!(
            Partition::from_lists(4, vec![vec![0, 1], vec![3]]),
            Err(MdsError::PartitionGap(vec![2]))
        );
        assert_eq!(
            Partition::from_lists(3, vec![vec![0, 1], vec![1, 2]]),
            Err(MdsError::PartitionOverlap(1))
        );
        assert_eq!(Partition::from_lists(3, vec![]), Err(MdsError::NoWorkers));
        let p = Partition::contiguous(10, 3);
        assert_eq!(p.vertices_of(0), &[0, 1, 2, 3]);
        assert_eq!(p.vertices_of(2), &[7, 8, 9]);
    }

    #[test]
    fn degree_balanced_star() {
        let p = Partition::degree_balanced(&star(9), 3);
        let owner = p.owner_table();
        let center = owner[0] as usize;
        assert_eq!(p.vertices_of(center), &[0]);
        let leaf_counts: Vec<usize> =
            (0..3).filter(|&w| w != center).map(|w| p.vertices_of(w).len()).collect();
        assert!(leaf_counts.iter().max().unwrap() - leaf_counts.iter().min().unwrap() <= 1);
    }

    #[test]
    fn silent_worker_is_logged_but_harmless() {
        let g = generate_ba(300, 3, 2).unwrap();
        let p = Partition::contiguous(300, 4);
        let reference = greedy_distributed(&g, &p, &Sequential).unwrap();
        let run =
            greedy_distributed_with(&g, &p, &Sequential, |_, w| w != 2, |_| true).unwrap();
        assert_eq!(run.set, reference.set);
        for r in &run.reports {
            assert_eq!(r.responded, r.worker != 2);
        }
    }

    #[test]
    fn early_stop_still_dominates() {
        let g = generate_ba(500, 2, 4).unwrap();
        let run = greedy_distributed_with(
            &g,
            &Partition::contiguous(500, 2),
            &Sequential,
            |_, _| true,
            |r| r <= 2,
        )
        .unwrap();
        assert!(!run.completed);
        assert_eq!(run.rounds, 2);
        assert!(is_dominating(&g, &run.set).unwrap().dominating);
    }

    #[test]
    fn white_count_strictly_decreases() {
        let run = solve(&generate_ba(2000, 5, 1).unwrap(), 3);
        for pair in run.stats.windows(2) {
            assert!(pair[1].white_before < pair[0].white_before);
        }
        assert!(run.stats.iter().all(|s| s.admitted > 0));
    }

    proptest! {
        #[test]
        fn independent_of_partition(n in 1usize..60, p in 0.0f64..0.4, seed: u64, w in 1usize..9) {
            let g = generate_er(n, p, seed).unwrap();
            let one = solve(&g, 1);
            let many = solve(&g, w);
            let balanced = greedy_distributed(&g, &Partition::degree_balanced(&g, w), &Sequential).unwrap();
            prop_assert_eq!(&one.set, &many.set);
            prop_assert_eq!(&one.set, &balanced.set);
            prop_assert_eq!(one.rounds, many.rounds);
            prop_assert!(one.rounds as usize <= n);
            prop_assert!(is_dominating(&g, &one.set).unwrap().dominating);
        }

        #[test]
        fn within_log_factor_of_optimum(n in 1usize..15, p in 0.0f64..0.7, seed: u64) {
            let g = generate_er(n, p, seed).unwrap();
            let opt = brute_force_mds(&g).unwrap().len() as f64;
            let delta = g.properties().delta_max as f64;
            let got = solve(&g, 2).set.len() as f64;
            prop_assert!(got <= (1.0 + libm::log(delta + 1.0)) * opt);
        }

        #[test]
        fn never_worse_than_everything(n in 1usize..80, seed: u64) {
            let g = generate_er(n, 0.1, seed).unwrap();
            let seq = greedy_sequential(&g);
            prop_assert!(seq.len() <= n);
            prop_assert!(solve(&g, 3).set.len() <= n);
        }
    }
}
