//! Helpers shared by the CLI test targets: running the binary and writing a
//! seeded synthetic corpus covering every manifest cell.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub const RECORDS_PER_CELL: usize = 100;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn vdialogue<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_vdialogue")).args(args).output().expect("binary runs")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

/// One (task, dataset) cell with its gold and prediction files.
#[derive(Debug, Clone)]
pub struct Cell {
    pub task: &'static str,
    pub dataset: &'static str,
    pub gold: PathBuf,
    pub pred: PathBuf,
}

/// Cells of the default manifest and, for retrieval, the catalogued candidate-set size.
pub const CELLS: [(&str, &str, usize); 10] = [
    ("response_generation", "simmc2.0", 0),
    ("response_generation", "mmconv", 0),
    ("intent_prediction", "photochat", 0),
    ("intent_prediction", "mmdialog", 0),
    ("retrieval_t2i", "photochat", 1000),
    ("retrieval_t2i", "mmdialog", 1000),
    ("retrieval_i2t", "imagechat", 100),
    ("retrieval_i2t", "visdial", 100),
    ("state_tracking", "simmc2.0", 0),
    ("state_tracking", "mmconv", 0),
];

const WORDS: [&str; 16] =
    ["the", "red", "jacket", "is", "on", "sale", "would", "you", "like", "a", "photo", "of", "dog", "beach", "?", "!"];
const SLOT_NAMES: [&str; 4] = ["color", "size", "brand", "price"];
const SLOT_VALUES: [&str; 5] = ["red", "xl", "acme", "cheap", "blue"];
const INTENTS: [&str; 3] = ["inform", "request", "confirm"];

fn jsonl(lines: impl IntoIterator<Item = serde_json::Value>) -> String {
    lines.into_iter().fold(String::new(), |mut out, v| {
        writeln!(out, "{v}").unwrap();
        out
    })
}

fn turn(i: usize) -> (String, usize) {
    (format!("dlg{:03}", i / 5), i % 5)
}

fn sentence(rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let len = rng.random_range(6..14);
    (0..len).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect()
}

fn state(rng: &mut ChaCha8Rng) -> (Option<&'static str>, serde_json::Map<String, serde_json::Value>) {
    let intent = rng.random_bool(0.9).then(|| INTENTS[rng.random_range(0..INTENTS.len())]);
    let mut slots = serde_json::Map::new();
    for name in SLOT_NAMES {
        if rng.random_bool(0.5) {
            slots.insert(name.into(), SLOT_VALUES[rng.random_range(0..SLOT_VALUES.len())].into());
        }
    }
    (intent, slots)
}

fn cell_files(task: &str, z: usize, rng: &mut ChaCha8Rng) -> (String, String) {
    let n = RECORDS_PER_CELL;
    match task {
        "response_generation" => {
            let (mut gold, mut pred) = (Vec::new(), Vec::new());
            for i in 0..n {
                let (d, t) = turn(i);
                let reference = sentence(rng);
                let keep = reference.len() - rng.random_range(0..2);
                let hypothesis: Vec<&str> = reference[..keep]
                    .iter()
                    .map(|w| if rng.random_bool(0.3) { WORDS[rng.random_range(0..WORDS.len())] } else { w })
                    .collect();
                gold.push(json!({"dialogue_id": d, "turn_index": t, "reference": reference.join(" ")}));
                pred.push(json!({"dialogue_id": d, "turn_index": t, "hypothesis": hypothesis.join(" ")}));
            }
            (jsonl(gold), jsonl(pred))
        }
        "intent_prediction" => {
            let use_scores = rng.random_bool(0.5);
            let (mut gold, mut pred) = (Vec::new(), Vec::new());
            for i in 0..n {
                let (d, t) = turn(i);
                let label = rng.random_bool(0.4);
                gold.push(json!({"dialogue_id": d, "turn_index": t, "label": u8::from(label)}));
                let right = rng.random_bool(0.75);
                let guess = label == right;
                if use_scores {
                    let score: f64 = if guess { rng.random_range(0.5..=1.0) } else { rng.random_range(0.0..0.5) };
                    pred.push(json!({"dialogue_id": d, "turn_index": t, "score": score}));
                } else {
                    pred.push(json!({"dialogue_id": d, "turn_index": t, "label": u8::from(guess)}));
                }
            }
            (jsonl(gold), jsonl(pred))
        }
        "retrieval_t2i" | "retrieval_i2t" => {
            let (mut gold, mut pred) = (Vec::new(), Vec::new());
            for q in 0..n {
                let candidates: Vec<String> = (0..z).map(|c| format!("q{q:03}c{c:04}")).collect();
                let target = candidates[rng.random_range(0..z)].clone();
                let mut ranking = candidates.clone();
                ranking.shuffle(rng);
                let at = ranking.iter().position(|c| *c == target).unwrap();
                let want = rng.random_range(0..z.min(15));
                ranking.swap(at, want);
                ranking.truncate(20);
                gold.push(json!({"query_id": format!("q{q:03}"), "target_id": target, "candidate_ids": candidates}));
                pred.push(json!({"query_id": format!("q{q:03}"), "ranking": ranking}));
            }
            (jsonl(gold), jsonl(pred))
        }
        "state_tracking" => {
            let (mut gold, mut pred) = (Vec::new(), Vec::new());
            for i in 0..n {
                let (d, t) = turn(i);
                let (intent, slots) = state(rng);
                gold.push(json!({"dialogue_id": d, "turn_index": t, "intent": intent, "slots": slots}));
                let (p_intent, p_slots) = if rng.random_bool(0.6) { (intent, slots) } else { state(rng) };
                pred.push(json!({"dialogue_id": d, "turn_index": t, "intent": p_intent, "slots": p_slots}));
            }
            (jsonl(gold), jsonl(pred))
        }
        other => panic!("no generator for {other}"),
    }
}

/// Writes gold and prediction files for every manifest cell under `dir`.
pub fn write_synthetic(dir: &Path, seed: u64) -> Vec<Cell> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fs::create_dir_all(dir).unwrap();
    CELLS
        .iter()
        .map(|&(task, dataset, z)| {
            let (gold_text, pred_text) = cell_files(task, z, &mut rng);
            let gold = dir.join(format!("{task}__{dataset}.gold.jsonl"));
            let pred = dir.join(format!("{task}__{dataset}.pred.jsonl"));
            fs::write(&gold, gold_text).unwrap();
            fs::write(&pred, pred_text).unwrap();
            Cell { task, dataset, gold, pred }
        })
        .collect()
}

/// Everything one end-to-end run writes, in a fixed order.
#[derive(Debug, PartialEq, Eq)]
pub struct PipelineOutput {
    pub reports: Vec<(String, Vec<u8>)>,
    pub vdscore: Vec<u8>,
    pub store: Vec<u8>,
    pub table: Vec<u8>,
}

/// eval for every cell, then vdscore, leaderboard add and show.
pub fn run_pipeline(work: &Path, seed: u64, timestamp: &str) -> Result<PipelineOutput, String> {
    let cells = write_synthetic(&work.join("data"), seed);
    let reports_dir = work.join("reports");
    fs::create_dir_all(&reports_dir).unwrap();
    for cell in &cells {
        let out = reports_dir.join(format!("{}__{}.json", cell.task, cell.dataset));
        let o = vdialogue([
            "eval".as_ref(),
            cell.task.as_ref(),
            cell.dataset.as_ref(),
            cell.gold.as_os_str(),
            cell.pred.as_os_str(),
            "--out".as_ref(),
            out.as_os_str(),
        ]);
        if !o.status.success() {
            return Err(format!("eval {} {} failed: {}", cell.task, cell.dataset, stderr(&o)));
        }
    }
    let vd = vdialogue(["vdscore".as_ref(), reports_dir.as_os_str()]);
    if !vd.status.success() {
        return Err(format!("vdscore failed: {}", stderr(&vd)));
    }
    let store = work.join("board.jsonl");
    let add = vdialogue([
        "leaderboard".as_ref(),
        "add".as_ref(),
        store.as_os_str(),
        "--reports".as_ref(),
        reports_dir.as_os_str(),
        "--name".as_ref(),
        "synthetic".as_ref(),
        "--timestamp".as_ref(),
        timestamp.as_ref(),
    ]);
    if !add.status.success() {
        return Err(format!("leaderboard add failed: {}", stderr(&add)));
    }
    let show = vdialogue(["leaderboard".as_ref(), "show".as_ref(), store.as_os_str()]);
    if !show.status.success() {
        return Err(format!("leaderboard show failed: {}", stderr(&show)));
    }
    let mut reports: Vec<(String, Vec<u8>)> = fs::read_dir(&reports_dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    reports.sort();
    Ok(PipelineOutput { reports, vdscore: vd.stdout, store: fs::read(&store).unwrap(), table: show.stdout })
}
