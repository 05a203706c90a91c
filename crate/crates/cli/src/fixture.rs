//! Synthetic stand-in for a longitudinal CD4 cohort table.
//!
//! Columns `ID,Time,Smoke,age,preCD4,CD4`, one row per visit. Exactly
//! [`BASELINE_ROWS`] subjects have a visit at `Time = 0.2`; the remaining
//! visits fall on other times. Values are synthetic and carry no meaning
//! beyond having plausible ranges.

use groupci_core::mcsim::derive_rep_stream;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const SUBJECTS: usize = 400;
pub const BASELINE_ROWS: usize = 138;
pub const BASELINE_TIME: &str = "0.2";
const OTHER_TIMES: [f64; 10] = [0.5, 0.9, 1.4, 2.0, 2.6, 3.1, 3.7, 4.2, 4.8, 5.3];
const VISIT_PROB: f64 = 0.4;

fn round(x: f64, dp: i32) -> f64 {
    let s = 10f64.powi(dp);
    (x * s).round() / s
}

/// CSV text of the fixture. Stream 0 picks the baseline subjects; subject
/// `i` draws from stream `i`.
pub fn generate(seed: u64) -> String {
    let mut pick = derive_rep_stream(seed, 0);
    let mut ids: Vec<usize> = (1..=SUBJECTS).collect();
    for i in (1..ids.len()).rev() {
        let j = (pick.uniform() * (i + 1) as f64) as usize % (i + 1);
        ids.swap(i, j);
    }
    let mut baseline = vec![false; SUBJECTS + 1];
    for &id in &ids[..BASELINE_ROWS] {
        baseline[id] = true;
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["ID", "Time", "Smoke", "age", "preCD4", "CD4"]).expect("in-memory write");
    for id in 1..=SUBJECTS {
        let mut s = derive_rep_stream(seed, id as u64);
        let smoke = u8::from(s.uniform() < 0.3);
        let age = round(35.0 + 7.0 * s.normal(), 1).clamp(18.0, 70.0);
        let pre = round(42.0 + 11.0 * s.normal(), 1).clamp(5.0, 80.0);
        let subject_level = 6.0 * s.normal();
        let mut visits: Vec<f64> = Vec::new();
        if baseline[id] {
            visits.push(0.2);
        }
        for t in OTHER_TIMES {
            if s.uniform() < VISIT_PROB {
                visits.push(t);
            }
        }
        for t in visits {
            let cd4 = round(pre - 4.5 * t + subject_level + 5.0 * s.normal(), 2).max(1.0);
            w.write_record([
                id.to_string(),
                t.to_string(),
                smoke.to_string(),
                age.to_string(),
                pre.to_string(),
                cd4.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}
