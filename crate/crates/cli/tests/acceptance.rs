//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL` line (straight to stderr, so it shows even when
//! the harness captures output) before asserting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mabed::dedup::{overlap_coefficient, register, Graphs, Registration};
use mabed::description::erdem_correlation;
use mabed::detection::{anomaly_series, detect_all, max_magnitude_interval, Signal};
use mabed::eval::MetricReport;
use mabed::pipeline::{run, run_alpha, run_phases, Params};
use mabed::testkit::{
    brute_force_mcss, burst_profile, generate, score_recovery, Background, PlantedEvent,
    SyntheticCorpus, SyntheticSpec,
};
use mabed::{Event, Interval, SliceIndex, StopWords};

/// Timing criteria share the machine with the rest of this file, so every
/// test holds this lock.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: u32, pass: bool, detail: impl AsRef<str>) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion}: {verdict} ({})\n", detail.as_ref());
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    pass
}

fn planted(word: &str, start: usize, len: usize, intensity: f64, mention_probability: f64) -> PlantedEvent {
    PlantedEvent {
        main_word: word.into(),
        companions: vec![format!("{word}x"), format!("{word}y")],
        distractors: vec![],
        start_slice: start,
        end_slice: start + len - 1,
        intensity,
        mention_probability,
        companion_probability: 0.6,
    }
}

fn build(corpus: &SyntheticCorpus, slice_minutes: u32) -> SliceIndex {
    let tweets = corpus.to_tweets(&StopWords::default());
    SliceIndex::build(&tweets, i64::from(slice_minutes) * 60, 0).unwrap()
}

const EVENT_WORDS: [&str; 13] = [
    "quake", "election", "summit", "eclipse", "strike", "final", "storm", "verdict", "launch",
    "outage", "promo", "giveaway", "discount",
];

#[test]
fn criterion_01_mcss_oracle() {
    let _serial = serial();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    let trials = 1000;
    for _ in 0..trials {
        let len = rng.gen_range(1..=200);
        // multiples of 1/8 keep every partial sum exact
        let series: Vec<f64> = (0..len).map(|_| f64::from(rng.gen_range(-80i32..=80)) / 8.0).collect();
        let fast = max_magnitude_interval(&series).unwrap();
        let (interval, sum) = brute_force_mcss(&series).unwrap();
        if fast.interval != interval || fast.magnitude != sum {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    let pass = mismatches == 0 && elapsed < Duration::from_secs(5);
    assert!(report(1, pass, format!("{trials} series, {mismatches} mismatches, {elapsed:.2?}")));
}

#[test]
fn criterion_02_anomaly_zero_sum() {
    let _serial = serial();
    let started = Instant::now();
    let spec = SyntheticSpec {
        seed: 2,
        start: "2009-11-01T00:00:00Z".into(),
        slices: 336,
        slice_minutes: 30,
        background: Background {
            vocabulary: 5000,
            tweets_per_slice: 300.0,
            words_per_tweet: 6,
            mention_probability: 0.3,
            diurnal_amplitude: 0.5,
        },
        events: (0..5)
            .map(|i| planted(EVENT_WORDS[i], 20 + 60 * i, 8, 200.0, 0.8))
            .collect(),
        filler_words: 2,
    };
    let corpus = generate(&spec).unwrap();
    let index = build(&corpus, 30);
    let mut worst: f64 = 0.0;
    for signal in [Signal::Mentions, Signal::Occurrences] {
        for word in index.words() {
            let total: f64 = anomaly_series(&index, word, signal).iter().sum();
            worst = worst.max(total.abs());
        }
    }
    let elapsed = started.elapsed();
    let tweets = index.total_tweets();
    let pass = tweets >= 100_000 && worst <= 1e-6 && elapsed < Duration::from_secs(30);
    assert!(report(2, pass, format!("{tweets} tweets, max |sum| {worst:.2e}, {elapsed:.2?}")));
}

#[test]
fn criterion_03_correlation() {
    let _serial = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let len = rng.gen_range(3..60);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let y: Vec<f64> = (0..len).map(|_| rng.gen_range(-100.0..100.0)).collect();
        worst = worst.max(erdem_correlation(&x, &y).unwrap().abs());
    }
    let x = [0.0, 2.0, 1.0, 3.0];
    let y = [1.0, 2.0, 4.0, 3.0];
    let identical = erdem_correlation(&x, &x).unwrap();
    // y[i] = c - x[i] negates every first difference
    let mirrored: Vec<f64> = x.iter().map(|v| 10.0 - v).collect();
    let negated = erdem_correlation(&x, &mirrored).unwrap();
    let hand = erdem_correlation(&x, &y).unwrap();

    let pass = worst <= 1.0 + 1e-9
        && (identical - 1.0).abs() < 1e-9
        && (negated + 1.0).abs() < 1e-9
        && (hand + 0.2722).abs() < 1e-4;
    assert!(report(
        3,
        pass,
        format!("max |rho| {worst:.12}, identical {identical}, negated {negated}, example {hand:.4}")
    ));
}

#[test]
fn criterion_04_metric_formulas() {
    let _serial = serial();
    let m = MetricReport::from_counts(40, 33, 0);
    let pass = m.precision == 0.825 && m.recall == 0.825 && m.derate == 0.0;
    assert!(report(
        4,
        pass,
        format!("P {} R {} F {} DERate {}", m.precision, m.recall, m.f_measure, m.derate)
    ));
}

/// Ten disjoint 7-slice bursts over two days, sized so non-event tweets
/// make up half the corpus.
fn recovery_spec(seed: u64) -> SyntheticSpec {
    let background = Background {
        vocabulary: 1000,
        tweets_per_slice: 200.0,
        words_per_tweet: 6,
        mention_probability: 0.3,
        diurnal_amplitude: 0.5,
    };
    let slices = 96;
    let len = 7;
    let profile: f64 = (0..len).map(|p| burst_profile(p, len)).sum();
    let per_event = background.tweets_per_slice * slices as f64 / 10.0;
    let intensity = per_event / (profile * background.word_rate());
    SyntheticSpec {
        seed,
        start: "2009-11-01T00:00:00Z".into(),
        slices,
        slice_minutes: 30,
        events: (0..10)
            .map(|i| planted(EVENT_WORDS[i], 4 + 9 * i, len, intensity, 0.8))
            .collect(),
        background,
        filler_words: 2,
    }
}

#[test]
fn criterion_05_planted_recovery() {
    let _serial = serial();
    let mut all_pass = true;
    let mut details = Vec::new();
    for seed in [5, 6, 7] {
        let started = Instant::now();
        let spec = recovery_spec(seed);
        let corpus = generate(&spec).unwrap();
        let noise = corpus.truth.stats.noise_fraction;
        let intensity = spec.events[0].intensity;
        let index = build(&corpus, 30);
        let events = run(&index, &Params { k: 10, ..Params::default() }).unwrap().events;
        let r = score_recovery(&events, &spec.events, 2);
        let elapsed = started.elapsed();
        let pass = r.f1 >= 0.9
            && (0.45..=0.55).contains(&noise)
            && intensity >= 5.0
            && elapsed < Duration::from_secs(60);
        all_pass &= pass;
        details.push(format!(
            "seed {seed}: F1 {:.2} noise {noise:.2} intensity {intensity:.0}x {elapsed:.2?} missed {:?}",
            r.f1, r.missed
        ));
    }
    assert!(report(5, all_pass, details.join("; ")));
}

#[test]
fn criterion_06_spam_filtering() {
    let _serial = serial();
    let background = Background {
        vocabulary: 1000,
        tweets_per_slice: 200.0,
        words_per_tweet: 6,
        mention_probability: 0.3,
        diurnal_amplitude: 0.5,
    };
    let mut good_seeds = 0;
    let mut lines = Vec::new();
    for seed in 0..10 {
        let real = (0..10).map(|i| planted(EVENT_WORDS[i], 3 + 11 * i, 6, 80.0, 0.8));
        let spam = (10..13).map(|i| planted(EVENT_WORDS[i], 3 + 11 * i, 6, 120.0, 0.0));
        let spec = SyntheticSpec {
            seed: 600 + seed,
            start: "2009-11-01T00:00:00Z".into(),
            slices: 144,
            slice_minutes: 30,
            background: background.clone(),
            events: real.chain(spam).collect(),
            filler_words: 2,
        };
        let index = build(&generate(&spec).unwrap(), 30);
        let params = Params { k: 10, ..Params::default() };
        let spam_in = |events: &[Event]| {
            events
                .iter()
                .flat_map(|e| &e.main_words)
                .filter(|w| EVENT_WORDS[10..].contains(&w.as_str()))
                .count()
        };
        let mabed = spam_in(&run(&index, &params).unwrap().events);
        let alpha = spam_in(&run_alpha(&index, &params).unwrap().events);
        if alpha >= 1 && mabed == 0 {
            good_seeds += 1;
        }
        lines.push(format!("{alpha}/{mabed}"));
    }
    let pass = good_seeds >= 8;
    assert!(report(
        6,
        pass,
        format!("{good_seeds}/10 seeds; spam main words alpha/mabed per seed: {}", lines.join(" "))
    ));
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn r_squared(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

#[test]
fn criterion_07_linear_scaling() {
    let _serial = serial();
    let spec = SyntheticSpec {
        seed: 7,
        start: "2009-11-01T00:00:00Z".into(),
        slices: 336,
        slice_minutes: 30,
        background: Background {
            vocabulary: 20_000,
            tweets_per_slice: 600.0,
            words_per_tweet: 6,
            mention_probability: 0.3,
            diurnal_amplitude: 0.5,
        },
        events: (0..10)
            .map(|i| planted(EVENT_WORDS[i], 10 + 32 * i, 8, 300.0, 0.8))
            .collect(),
        filler_words: 2,
    };
    let corpus = generate(&spec).unwrap();
    let tweets = corpus.to_tweets(&StopWords::default());
    let mut order: Vec<usize> = (0..tweets.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(70));

    let index = SliceIndex::build(&tweets, 1800, 0).unwrap();
    run(&index, &Params::default()).unwrap();
    drop(index);

    let mut points = Vec::new();
    for fraction in [0.40, 0.55, 0.70, 0.85, 1.00] {
        let mut keep: Vec<usize> = order[..(tweets.len() as f64 * fraction) as usize].to_vec();
        keep.sort_unstable();
        let sample: Vec<_> = keep.iter().map(|&i| tweets[i].clone()).collect();
        let secs = median(
            (0..5)
                .map(|_| {
                    let started = Instant::now();
                    let index = SliceIndex::build(&sample, 1800, 0).unwrap();
                    run(&index, &Params::default()).unwrap();
                    started.elapsed().as_secs_f64()
                })
                .collect(),
        );
        points.push((sample.len() as f64, secs));
    }
    let r2 = r_squared(&points);

    let index = SliceIndex::build(&tweets, 1800, 0).unwrap();
    let time = |threads| {
        median(
            (0..5)
                .map(|_| {
                    let started = Instant::now();
                    std::hint::black_box(detect_all(&index, Signal::Mentions, threads));
                    started.elapsed().as_secs_f64()
                })
                .collect(),
        )
    };
    let sequential = time(1);
    let parallel = time(8);
    let speedup = sequential / parallel;
    let a = detect_all(&index, Signal::Mentions, 1);
    let b = detect_all(&index, Signal::Mentions, 8);
    let identical = a.len() == b.len()
        && a.iter().zip(&b).all(|(x, y)| {
            x.word == y.word && x.interval == y.interval && x.magnitude.to_bits() == y.magnitude.to_bits()
        });
    let full_a = run(&index, &Params::default()).unwrap().events;
    let full_b = run(&index, &Params { threads: 8, ..Params::default() }).unwrap().events;
    let identical = identical && full_a == full_b;

    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let timings: Vec<String> = points.iter().map(|(n, s)| format!("{n:.0}:{s:.3}s")).collect();
    let pass = tweets.len() >= 200_000 && r2 >= 0.9 && speedup >= 2.0 && identical;
    assert!(report(
        7,
        pass,
        format!(
            "{} tweets; R^2 {r2:.3} [{}]; phase one 1 thread {sequential:.4}s, 8 threads {parallel:.4}s, speedup {speedup:.2}x on {cores} core(s); identical output {identical}",
            tweets.len(),
            timings.join(" ")
        )
    ));
}

#[test]
fn criterion_08_dedup_sigma() {
    let _serial = serial();
    let background = Background {
        vocabulary: 500,
        tweets_per_slice: 60.0,
        words_per_tweet: 5,
        mention_probability: 0.3,
        diurnal_amplitude: 0.3,
    };
    let mut first = planted("hurricane", 20, 9, 60.0, 0.8);
    first.companion_probability = 0.5;
    let mut second = planted("evacuation", 24, 9, 50.0, 0.8);
    second.companion_probability = 0.5;
    let spec = SyntheticSpec {
        seed: 8,
        start: "2009-11-01T00:00:00Z".into(),
        slices: 96,
        slice_minutes: 30,
        background,
        events: vec![first, second],
        filler_words: 2,
    };
    let index = build(&generate(&spec).unwrap(), 30);
    let phases = |sigma| {
        let params = Params { k: 10_000, sigma, ..Params::default() };
        run_phases(&index, &params).unwrap()
    };
    let (loose, loose_graphs) = phases(0.2);
    let (strict, strict_graphs) = phases(1.0);
    let monotone = loose.events.len() <= strict.events.len();

    // at sigma = 1 every merge joins nested intervals
    let nested = strict_graphs.redundancy.edges().all(|(a, b)| {
        let find = |w: &str| {
            strict_graphs
                .events
                .get(w)
                .or_else(|| strict_graphs.redundancy.aside().iter().find(|e| e.main_word() == w))
                .unwrap()
                .interval
        };
        overlap_coefficient(&find(a), &find(b)) >= 1.0
    });

    // the same descriptions, moved to pairwise disjoint intervals
    let mut described: Vec<Event> = loose_graphs.events.events().to_vec();
    described.extend(loose_graphs.redundancy.aside().iter().cloned());
    described.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    let mut graphs = Graphs::default();
    let mut start = 1;
    let mut merged = 0;
    for mut event in described.iter().cloned() {
        let len = event.interval.len();
        event.interval = Interval::new(start, start + len - 1);
        start += len;
        if register(&mut graphs, event, 1.0, Default::default()) != Registration::Inserted {
            merged += 1;
        }
    }

    let pass = monotone && nested && merged == 0;
    assert!(report(
        8,
        pass,
        format!(
            "distinct events sigma=0.2: {}, sigma=1.0: {}; merges at 0.2: {}; disjoint merges at 1.0: {merged} of {}",
            loose.events.len(),
            strict.events.len(),
            loose.meta.duplicates,
            described.len()
        )
    ));
}

fn mabed() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mabed"));
    cmd.env_remove("MABED_THREADS").stderr(Stdio::null());
    cmd
}

fn synth_to(dir: &Path) -> PathBuf {
    let spec = recovery_spec(9);
    let spec_path = dir.join("spec.json");
    std::fs::write(&spec_path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    let out = dir.join("corpus");
    let status = mabed()
        .args(["synth", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    out.join("corpus.csv")
}

fn detect_to(input: &Path, out: &Path, extra: &[&str]) -> serde_json::Value {
    let status = mabed()
        .arg("detect")
        .arg("--input")
        .arg(input)
        .arg("--out")
        .arg(out)
        .args(extra)
        .status()
        .unwrap();
    assert!(status.success());
    serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap()
}

#[test]
fn criterion_09_determinism() {
    let _serial = serial();
    let dir = tempfile::tempdir().unwrap();
    let input = synth_to(dir.path());
    let runs = [dir.path().join("a"), dir.path().join("b"), dir.path().join("c")];
    detect_to(&input, &runs[0], &[]);
    detect_to(&input, &runs[1], &[]);
    detect_to(&input, &runs[2], &["--threads", "8"]);

    let mut differing = Vec::new();
    for file in ["events.json", "timeline.json", "impact.json", "graph.json"] {
        let first = std::fs::read(runs[0].join(file)).unwrap();
        for other in &runs[1..] {
            if std::fs::read(other.join(file)).unwrap() != first {
                differing.push(format!("{file} in {}", other.file_name().unwrap().to_string_lossy()));
            }
        }
    }
    let pass = differing.is_empty();
    assert!(report(
        9,
        pass,
        if pass {
            "4 files byte-identical across 2 runs and an 8-thread run".to_string()
        } else {
            format!("differs: {}", differing.join(", "))
        }
    ));
}

#[test]
fn criterion_10_defaults() {
    let _serial = serial();
    let p = Params::default();
    let library = p.slice_minutes == 30 && p.p == 10 && p.theta == 0.7 && p.sigma == 0.5 && p.k == 40;

    let dir = tempfile::tempdir().unwrap();
    let input = synth_to(dir.path());
    let run = detect_to(&input, &dir.path().join("out"), &[]);
    let params = &run["params"];
    let cli = params["slice_minutes"] == 30
        && params["p"] == 10
        && params["theta"] == 0.7
        && params["sigma"] == 0.5
        && params["k"] == 40
        && params["variant"] == "mabed";

    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/schemas/run.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let valid = jsonschema::JSONSchema::compile(&schema).unwrap().is_valid(&run);

    let pass = library && cli && valid;
    assert!(report(
        10,
        pass,
        format!("library defaults {library}, cli run.json params {cli}, run.json valid {valid}")
    ));
}
