//! Block tree with heaviest-work fork choice and depth-f finality.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use thiserror::Error;

use crate::crypto::{hash, Digest};
use crate::protocol::{Block, BlockHeader, ChainView, ProblemDescriptor};

pub const DEFAULT_CONFIRMATION_DEPTH: u64 = 6;

pub fn genesis_digest() -> Digest {
    hash(b"scalowork-genesis")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("solution is empty")]
    EmptySolution,
    #[error("chain log line {line}: {what}")]
    Log { line: usize, what: &'static str },
}

/// `|E| * |V| * k / |S|`, with every graph quantity read from the descriptor.
pub fn work_done(header: &BlockHeader) -> Result<f64, ChainError> {
    work_done_for(&header.descriptor, header.solution.len())
}

pub fn work_done_for(desc: &ProblemDescriptor, solution_size: usize) -> Result<f64, ChainError> {
    if solution_size == 0 {
        return Err(ChainError::EmptySolution);
    }
    Ok(desc.m as f64 * desc.n as f64 * (desc.bound().k / solution_size as f64))
}

/// What the tree needs to know about a block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    pub digest: Digest,
    pub parent: Digest,
    pub instance_id: u64,
    pub solution_size: usize,
    pub work_done: f64,
    /// Whether the committee approval on the block checked out.
    pub committee_ok: bool,
}

impl BlockSummary {
    pub fn of(block: &Block, committee_ok: bool) -> Result<Self, ChainError> {
        Ok(Self {
            digest: block.hash(),
            parent: block.header.prev_hash,
            instance_id: block.header.instance_id,
            solution_size: block.header.solution.len(),
            work_done: work_done(&block.header)?,
            committee_ok,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainEntry {
    pub digest: Digest,
    pub parent: Digest,
    pub height: u64,
    pub instance_id: u64,
    pub solution_size: usize,
    pub work_done: f64,
    pub cumulative: f64,
    /// False when this block or an ancestor breaks the id or committee rule.
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    /// The block became (or led to) the adopted tip.
    Adopted,
    /// Stored on a side branch.
    Side,
    /// Stored but never eligible.
    Invalid,
    /// Parent unknown; held until it arrives or ages out.
    Orphaned,
    Duplicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReorgStats {
    pub reorgs: u64,
    pub max_depth: u64,
    /// Committed blocks that fell off the adopted chain.
    pub reverted_committed: u64,
}

#[derive(Debug, Clone)]
pub struct ChainState {
    f: u64,
    genesis: Digest,
    entries: BTreeMap<Digest, ChainEntry>,
    tip: Digest,
    orphans: Vec<(BlockSummary, u64)>,
    stats: ReorgStats,
}

impl ChainState {
    pub fn new(f: u64) -> Self {
        let genesis = genesis_digest();
        let mut entries = BTreeMap::new();
        entries.insert(
            genesis,
            ChainEntry {
                digest: genesis,
                parent: Digest::ZERO,
                height: 0,
                instance_id: 0,
                solution_size: 0,
                work_done: 0.0,
                cumulative: 0.0,
                valid: true,
            },
        );
        Self { f, genesis, entries, tip: genesis, orphans: Vec::new(), stats: ReorgStats::default() }
    }

    pub fn confirmation_depth(&self) -> u64 {
        self.f
    }

    pub fn genesis(&self) -> Digest {
        self.genesis
    }

    pub fn tip(&self) -> &ChainEntry {
        &self.entries[&self.tip]
    }

    pub fn height(&self) -> u64 {
        self.tip().height
    }

    pub fn get(&self, digest: &Digest) -> Option<&ChainEntry> {
        self.entries.get(digest)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.len() <= 1
    }

    pub fn orphan_count(&self) -> usize {
        self.orphans.len()
    }

    pub fn stats(&self) -> ReorgStats {
        self.stats
    }

    pub fn committed_height(&self) -> u64 {
        self.height().saturating_sub(self.f)
    }

    /// Adopted chain from genesis to tip.
    pub fn adopted(&self) -> Vec<&ChainEntry> {
        let mut out = Vec::new();
        let mut cur = self.tip;
        loop {
            let e = &self.entries[&cur];
            out.push(e);
            if e.height == 0 {
                break;
            }
            cur = e.parent;
        }
        out.reverse();
        out
    }

    pub fn on_adopted(&self, digest: &Digest) -> bool {
        match self.entries.get(digest) {
            Some(e) => self.ancestor_at(&self.tip, e.height) == Some(*digest),
            None => false,
        }
    }

    pub fn is_committed(&self, digest: &Digest) -> bool {
        self.entries.get(digest).is_some_and(|e| e.height <= self.committed_height()) && self.on_adopted(digest)
    }

    fn ancestor_at(&self, from: &Digest, height: u64) -> Option<Digest> {
        let mut cur = self.entries.get(from)?;
        if cur.height < height {
            return None;
        }
        while cur.height > height {
            cur = &self.entries[&cur.parent];
        }
        Some(cur.digest)
    }

    fn fork_point(&self, a: &Digest, b: &Digest) -> u64 {
        let (mut x, mut y) = (&self.entries[a], &self.entries[b]);
        while x.height > y.height {
            x = &self.entries[&x.parent];
        }
        while y.height > x.height {
            y = &self.entries[&y.parent];
        }
        while x.digest != y.digest {
            x = &self.entries[&x.parent];
            y = &self.entries[&y.parent];
        }
        x.height
    }

    pub fn insert(&mut self, block: BlockSummary) -> Insertion {
        if self.entries.contains_key(&block.digest) || self.orphans.iter().any(|(o, _)| o.digest == block.digest) {
            return Insertion::Duplicate;
        }
        if !self.entries.contains_key(&block.parent) {
            let h = self.height();
            self.orphans.push((block, h));
            return Insertion::Orphaned;
        }
        let digest = block.digest;
        let mut status = self.attach(block);
        let mut ready = Vec::from([digest]);
        while let Some(parent) = ready.pop() {
            let (kids, rest): (Vec<_>, Vec<_>) = core::mem::take(&mut self.orphans).into_iter().partition(|(o, _)| o.parent == parent);
            self.orphans = rest;
            for (kid, _) in kids {
                ready.push(kid.digest);
                if self.attach(kid) == Insertion::Adopted && status == Insertion::Side {
                    status = Insertion::Adopted;
                }
            }
        }
        let horizon = 2 * self.f;
        let h = self.height();
        self.orphans.retain(|(_, seen)| seen + horizon >= h);
        status
    }

    fn attach(&mut self, b: BlockSummary) -> Insertion {
        let parent = &self.entries[&b.parent];
        let valid = parent.valid && b.committee_ok && b.instance_id > parent.instance_id && b.work_done.is_finite();
        let entry = ChainEntry {
            digest: b.digest,
            parent: b.parent,
            height: parent.height + 1,
            instance_id: b.instance_id,
            solution_size: b.solution_size,
            work_done: b.work_done,
            cumulative: parent.cumulative + b.work_done,
            valid,
        };
        let (digest, cumulative) = (entry.digest, entry.cumulative);
        self.entries.insert(digest, entry);
        if !valid {
            return Insertion::Invalid;
        }
        if cumulative <= self.tip().cumulative {
            return Insertion::Side;
        }
        let old = self.tip;
        let fork = self.fork_point(&old, &digest);
        let old_height = self.entries[&old].height;
        if fork < old_height {
            let depth = old_height - fork;
            self.stats.reorgs += 1;
            self.stats.max_depth = self.stats.max_depth.max(depth);
            self.stats.reverted_committed += old_height.saturating_sub(self.f).saturating_sub(fork);
        }
        self.tip = digest;
        Insertion::Adopted
    }

    /// One line per adopted block: `height digest id size work cumulative`.
    pub fn render_log(&self) -> String {
        self.render_log_through(u64::MAX)
    }

    /// [`render_log`](Self::render_log) cut off after `height`.
    pub fn render_log_through(&self, height: u64) -> String {
        let mut out = String::new();
        for e in self.adopted().into_iter().take_while(|e| e.height <= height) {
            let _ = writeln!(
                out,
                "{} {} {} {} {:.6} {:.6}",
                e.height,
                e.digest.to_hex(),
                e.instance_id,
                e.solution_size,
                e.work_done,
                e.cumulative
            );
        }
        out
    }
}

impl Default for ChainState {
    fn default() -> Self {
        Self::new(DEFAULT_CONFIRMATION_DEPTH)
    }
}

impl ChainView for ChainState {
    fn instance_id_of(&self, digest: &Digest) -> Option<u64> {
        self.entries.get(digest).filter(|e| e.valid).map(|e| e.instance_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub height: u64,
    pub digest: Digest,
    pub instance_id: u64,
    pub solution_size: usize,
    pub work_done: f64,
    pub cumulative: f64,
}

pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, ChainError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what| ChainError::Log { line: i + 1, what };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(bad("expected six fields"));
        }
        out.push(LogEntry {
            height: f[0].parse().map_err(|_| bad("height"))?,
            digest: Digest::from_hex(f[1]).map_err(|_| bad("digest"))?,
            instance_id: f[2].parse().map_err(|_| bad("instance id"))?,
            solution_size: f[3].parse().map_err(|_| bad("solution size"))?,
            work_done: f[4].parse().map_err(|_| bad("work done"))?,
            cumulative: f[5].parse().map_err(|_| bad("cumulative work"))?,
        });
    }
    Ok(out)
}

/// Digest to instance id, for checking parents against an exported log.
pub fn log_view(entries: &[LogEntry]) -> BTreeMap<Digest, u64> {
    entries.iter().map(|e| (e.digest, e.instance_id)).collect()
}
