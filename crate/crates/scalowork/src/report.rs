//! CSV output. Floats are written with fixed precision so reruns compare
//! byte for byte.

use scalowork_core::mds::RoundStats;
use scalowork_core::pool::{ContributionLedger, Payouts};
use scalowork_core::sim::{EpochRecord, RunMetrics, SelfishOutcome, StorageReport, TheftOutcome};

/// Renders a header and rows through the csv writer.
pub fn to_csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("fields are utf-8")
}

pub fn f6(x: f64) -> String {
    format!("{x:.6}")
}

pub fn metrics_csv<'a>(runs: impl IntoIterator<Item = (u64, &'a RunMetrics)>) -> String {
    let mut header = vec!["seed"];
    header.extend(EpochRecord::FIELDS);
    let rows = runs.into_iter().flat_map(|(seed, m)| {
        m.records.iter().map(move |r| {
            let mut row = vec![seed.to_string()];
            row.extend(r.values());
            row
        })
    });
    to_csv(&header, rows)
}

pub const SELFISH_FIELDS: [&str; 13] = [
    "seed",
    "lambda",
    "epochs_run",
    "committed",
    "adversary_blocks",
    "adversary_wins",
    "releases",
    "rejected_reveals",
    "max_private_lead",
    "heavier_deep_releases",
    "max_reorg_depth",
    "reversions",
    "overtake",
];

pub fn selfish_csv<'a>(runs: impl IntoIterator<Item = (u64, f64, &'a SelfishOutcome)>) -> String {
    let rows = runs.into_iter().map(|(seed, lambda, o)| {
        vec![
            seed.to_string(),
            f6(lambda),
            o.metrics.epochs_run.to_string(),
            o.metrics.records.len().to_string(),
            o.adversary_blocks.to_string(),
            o.adversary_wins.to_string(),
            o.releases.to_string(),
            o.rejected_reveals.to_string(),
            o.max_private_lead.to_string(),
            o.heavier_deep_releases.to_string(),
            o.metrics.max_reorg_depth.to_string(),
            o.metrics.reversions.to_string(),
            o.overtake.to_string(),
        ]
    });
    to_csv(&SELFISH_FIELDS, rows)
}

pub fn theft_csv<'a>(runs: impl IntoIterator<Item = (u64, &'a TheftOutcome)>) -> String {
    let header =
        ["seed", "n", "search_space", "budget", "examined", "same_instance", "success", "ambiguity_log10"];
    let rows = runs.into_iter().map(|(seed, o)| {
        vec![
            seed.to_string(),
            o.n.to_string(),
            format!("{:.0}", o.search_space),
            o.budget.to_string(),
            o.examined.to_string(),
            o.same_instance.to_string(),
            o.success.to_string(),
            f6(o.ambiguity_log10),
        ]
    });
    to_csv(&header, rows)
}

pub fn storage_csv(pools: u64, n: u64, m: u64, delta_min: u32, r: &StorageReport) -> String {
    let header = ["pools", "n", "m", "delta_min", "scalowork_edges", "chrisimos_edges", "difference"];
    let row = vec![
        pools.to_string(),
        n.to_string(),
        m.to_string(),
        delta_min.to_string(),
        f6(r.scalowork),
        f6(r.chrisimos),
        f6(r.difference),
    ];
    to_csv(&header, [row])
}

pub fn rounds_csv(stats: &[RoundStats]) -> String {
    let rows = stats.iter().map(|s| vec![s.round.to_string(), s.white_before.to_string(), s.admitted.to_string()]);
    to_csv(&["round", "white_before", "admitted"], rows)
}

/// Per miner: share of work and what it was paid.
pub fn ledger_csv(ledger: &ContributionLedger, payouts: &Payouts) -> String {
    let rows = ledger.miners.iter().enumerate().map(|(i, m)| {
        vec![
            i.to_string(),
            m.assigned.to_string(),
            m.reported.to_string(),
            m.missed.to_string(),
            payouts.miners.get(i).copied().unwrap_or(0).to_string(),
        ]
    });
    to_csv(&["miner", "assigned", "reported", "missed", "payout"], rows)
}
