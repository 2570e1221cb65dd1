//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Runs without the libtest harness so the criteria execute in order, one
//! at a time, and the timing criteria get the machine to themselves.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;

use common::{param_groups, param_mut, random_batch, random_config, random_instance, random_store, rel_close, rng, smooth_at, SMALL};
use sparsekge::baseline::{dense_backward, dense_forward};
use sparsekge::data::Vocab;
use sparsekge::eval::{rank_queries, FilterIndex};
use sparsekge::incidence::{build_ht, build_hrt};
use sparsekge::models::{backward, energy_sign, forward};
use sparsekge::sparse::{spmm, spmm_into, spmm_transpose, CooMatrix, DenseMatrix, PlusTimes, Stacked};
use sparsekge::training::{loss_and_gradients, negative_sample_without_loops};
use sparsekge::{evaluate, Dataset, EmbeddingStore, Engine, EvalReport, ModelConfig, ModelKind, Norm, Protocol, TripleBatch};

enum Verdict {
    Pass(String),
    Skip(String),
}

type Check = Result<Verdict, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {:.1}s, limit {}s", took.as_secs_f64(), limit.as_secs()))
}

fn row0(coo: &CooMatrix<f64>) -> Vec<(usize, f64)> {
    let mut v: Vec<_> = coo.cols().iter().copied().zip(coo.vals().iter().copied()).collect();
    v.sort_by_key(|e| e.0);
    v
}

fn c1_incidence() -> Check {
    let start = Instant::now();
    let hrt = build_hrt::<f64>(&TripleBatch::from_triples(&[(5, 2, 15)], 20, 3).map_err(|e| e.to_string())?);
    ensure(hrt.shape() == (1, 23), || format!("hrt shape {:?}", hrt.shape()))?;
    let got = row0(&hrt);
    ensure(got == vec![(5, 1.0), (15, -1.0), (22, 1.0)], || format!("hrt row {got:?}"))?;
    let ht = build_ht::<f64>(&TripleBatch::from_triples(&[(5, 0, 15)], 22, 1).map_err(|e| e.to_string())?);
    ensure(ht.shape() == (1, 22), || format!("ht shape {:?}", ht.shape()))?;
    let got = row0(&ht);
    ensure(got == vec![(5, 1.0), (15, -1.0)], || format!("ht row {got:?}"))?;
    within(Duration::from_secs(1), start)?;
    Ok(Verdict::Pass("hrt {+1@5, -1@15, +1@22}, ht {+1@5, -1@15}".into()))
}

fn c2_oracle() -> Check {
    let start = Instant::now();
    let mut r = rng(2024);
    let mut worst = 0.0f64;
    for kind in ModelKind::ALL {
        for i in 0..200 {
            let inst = random_instance(kind, &mut r, &SMALL);
            let (c, s, b) = (&inst.config, &inst.store, &inst.batch);
            let sparse = forward(c, b, s).map_err(|e| e.to_string())?;
            let dense = dense_forward(c, b, s).map_err(|e| e.to_string())?;
            let mut pairs: Vec<(f64, f64)> = sparse.scores().iter().copied().zip(dense.scores().iter().copied()).collect();
            let gs = backward(c, &sparse, &inst.upstream, s).map_err(|e| e.to_string())?;
            let gd = dense_backward(&dense, &inst.upstream, s).map_err(|e| e.to_string())?;
            for ((_, a), (_, d)) in gs.groups().into_iter().zip(gd.groups()) {
                pairs.extend(a.data().iter().copied().zip(d.data().iter().copied()));
            }
            for (x, y) in pairs {
                let rel = (x - y).abs() / x.abs().max(y.abs()).max(1.0);
                worst = worst.max(rel);
                ensure(rel <= 1e-10, || format!("{kind} instance {i}: {x} vs {y}"))?;
            }
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok(Verdict::Pass(format!("7 models x 200 instances, worst relative gap {worst:.1e}")))
}

fn inner(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn c3_gradients() -> Check {
    let start = Instant::now();
    let mut r = rng(77);
    let mut worst_adj = 0.0f64;
    for _ in 0..100 {
        let (rows, cols, d) = (r.gen_range(1..40), r.gen_range(1..40), r.gen_range(1..8));
        let density = r.gen_range(0.02..0.5);
        let mut coo = CooMatrix::new(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if r.gen_bool(density) {
                    coo.push(i, j, r.gen_range(-2.0..2.0)).map_err(|e| e.to_string())?;
                }
            }
        }
        let a = coo.to_csr();
        let mut dense = |n: usize| DenseMatrix::from_vec(n, d, (0..n * d).map(|_| r.gen_range(-2.0..2.0)).collect()).unwrap();
        let (x, g) = (dense(cols), dense(rows));
        let lhs = inner(&spmm(&a, &x, &PlusTimes).map_err(|e| e.to_string())?, &g);
        let rhs = inner(&x, &spmm_transpose(&a, &g).map_err(|e| e.to_string())?);
        let gap = (lhs - rhs).abs() / lhs.abs().max(1.0);
        worst_adj = worst_adj.max(gap);
        ensure(gap <= 1e-10, || format!("adjoint: {lhs} vs {rhs}"))?;
    }

    const STEP: f64 = 1e-6;
    const GAP: f64 = 1e-3;
    let mut checked = 0usize;
    for kind in ModelKind::ALL {
        for _ in 0..6 {
            let (c, mut s, pos, neg, margin) = loop {
                let c = random_config(kind, &mut r, 6);
                let (n, nr, m) = (r.gen_range(3..10), r.gen_range(1..4), r.gen_range(1..8));
                let s = random_store(&c, n, nr, &mut r);
                let pos = random_batch(kind, n, nr, m, &mut r);
                let neg = negative_sample_without_loops(&pos, r.gen()).map_err(|e| e.to_string())?;
                let margin = r.gen_range(0.0..2.0);
                let sign = energy_sign::<f64>(kind);
                let sp = forward(&c, &pos, &s).map_err(|e| e.to_string())?;
                let sn = forward(&c, &neg, &s).map_err(|e| e.to_string())?;
                let hinge_clear = sp.scores().iter().zip(sn.scores()).all(|(p, q)| (margin + sign * p - sign * q).abs() > GAP);
                if hinge_clear && smooth_at(&c, &s, &pos, GAP) && smooth_at(&c, &s, &neg, GAP) {
                    break (c, s, pos, neg, margin);
                }
            };
            let loss = |s: &EmbeddingStore<f64>| loss_and_gradients(s, &c, &pos, &neg, margin, Engine::Sparse).unwrap().0;
            let (_, grads) = loss_and_gradients(&s, &c, &pos, &neg, margin, Engine::Sparse).map_err(|e| e.to_string())?;
            let analytic: Vec<(&str, Vec<f64>)> = grads.groups().into_iter().map(|(n, g)| (n, g.data().to_vec())).collect();
            for (name, len) in param_groups(&s) {
                let want = &analytic.iter().find(|(n, _)| *n == name).unwrap().1;
                for k in 0..len {
                    let orig = param_mut(&mut s, name)[k];
                    param_mut(&mut s, name)[k] = orig + STEP;
                    let up = loss(&s);
                    param_mut(&mut s, name)[k] = orig - STEP;
                    let down = loss(&s);
                    param_mut(&mut s, name)[k] = orig;
                    let numeric = (up - down) / (2.0 * STEP);
                    ensure(rel_close(want[k], numeric, 1e-5, 1e-2), || {
                        format!("{kind} {name}[{k}]: analytic {} vs numeric {numeric}", want[k])
                    })?;
                    checked += 1;
                }
            }
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok(Verdict::Pass(format!(
        "100 adjoint checks (worst {worst_adj:.1e}), {checked} finite-difference coordinates over 7 models"
    )))
}

/// Streams through `junk` so the next kernel call starts with cold caches.
fn evict(junk: &[u64]) {
    let mut acc = 0u64;
    for i in (0..junk.len()).step_by(8) {
        acc = acc.wrapping_add(junk[i]);
    }
    std::hint::black_box(acc);
}

fn c4_complexity() -> Check {
    let start = Instant::now();
    let (n, nr) = (100_000usize, 100usize);
    let dims = [64usize, 128, 256, 512];
    let powers: Vec<u32> = (14..=18).collect();
    let mut r = rng(4);
    let junk: Vec<u64> = (0..(64usize << 20)).map(|i| i as u64).collect();
    let tables: Vec<_> = dims
        .iter()
        .map(|&d| {
            let mut t = |rows: usize| DenseMatrix::from_vec(rows, d, (0..rows * d).map(|_| r.gen::<f64>()).collect()).unwrap();
            (t(n), t(nr))
        })
        .collect();
    let csrs: Vec<_> = powers
        .iter()
        .map(|&p| {
            let triples: Vec<_> = (0..1usize << p).map(|_| (r.gen_range(0..n), r.gen_range(0..nr), r.gen_range(0..n))).collect();
            build_hrt::<f64>(&TripleBatch::from_triples(&triples, n, nr).unwrap()).to_csr()
        })
        .collect();

    // Five interleaved passes over the grid so a burst of host noise hits
    // one sample of many cells rather than all samples of one.
    let mut buf = vec![0.0f64; (1usize << powers[powers.len() - 1]) * dims[dims.len() - 1]];
    let mut samples = vec![vec![Vec::new(); powers.len()]; dims.len()];
    for _ in 0..5 {
        for (i, &d) in dims.iter().enumerate() {
            let x = Stacked::new(&tables[i].0, &tables[i].1).map_err(|e| e.to_string())?;
            for (j, a) in csrs.iter().enumerate() {
                let m = a.n_rows();
                buf.resize(m * d, 0.0);
                let mut z = DenseMatrix::from_vec(m, d, std::mem::take(&mut buf)).map_err(|e| e.to_string())?;
                let (mut total, mut calls) = (0.0, 0u32);
                while total < 0.03 || calls < 2 {
                    evict(&junk);
                    let t = Instant::now();
                    spmm_into(a, &x, &PlusTimes, &mut z).map_err(|e| e.to_string())?;
                    std::hint::black_box(&z);
                    total += t.elapsed().as_secs_f64();
                    calls += 1;
                }
                samples[i][j].push(total / calls as f64);
                buf = z.into_vec();
            }
        }
    }
    let median = |v: &Vec<f64>| {
        let mut v = v.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        v[v.len() / 2]
    };
    let t: Vec<Vec<f64>> = samples.iter().map(|row| row.iter().map(median).collect()).collect();

    let mut ratios = Vec::new();
    for i in 0..dims.len() {
        for j in 0..powers.len() {
            if j + 1 < powers.len() {
                ratios.push((format!("d={} M=2^{}->2^{}", dims[i], powers[j], powers[j + 1]), t[i][j + 1] / t[i][j]));
            }
            if i + 1 < dims.len() {
                ratios.push((format!("M=2^{} d={}->{}", powers[j], dims[i], dims[i + 1]), t[i + 1][j] / t[i][j]));
            }
        }
    }
    for (i, d) in dims.iter().enumerate() {
        let cells: Vec<String> = t[i].iter().map(|s| format!("{:.4}", s)).collect();
        println!("       d={d:<3} median s over M=2^14..2^18: {}", cells.join(" "));
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(lo, hi), (_, x)| (lo.min(*x), hi.max(*x)));
    let bad: Vec<String> = ratios
        .iter()
        .filter(|(_, x)| !(1.4..=2.6).contains(x))
        .map(|(k, x)| format!("{k}: {x:.2}"))
        .collect();
    ensure(bad.is_empty(), || format!("ratios outside [1.4, 2.6]: {}", bad.join(", ")))?;
    within(Duration::from_secs(300), start)?;
    Ok(Verdict::Pass(format!("{} doubling ratios, all in [{lo:.2}, {hi:.2}]", ratios.len())))
}

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sparsekge"))
        .args(args)
        .output()
        .map_err(|e| format!("spawning sparsekge: {e}"))?;
    if !out.status.success() {
        return Err(format!("sparsekge {} exited {}: {}", args.join(" "), out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn json(text: &str) -> Result<Value, String> {
    serde_json::from_str(text.trim()).map_err(|e| format!("bad JSON ({e}): {text}"))
}

fn num(v: &Value, path: &[&str]) -> Result<f64, String> {
    let mut cur = v;
    for key in path {
        cur = &cur[*key];
    }
    cur.as_f64().ok_or_else(|| format!("missing number at {}", path.join(".")))
}

fn c5_speedup(tmp: &Path) -> Check {
    let start = Instant::now();
    let out = tmp.join("bench");
    let summary = json(&cli(&[
        "bench",
        "--synthetic",
        "20000:50:200000",
        "--model",
        "transe",
        "--dim",
        "256",
        "--batch-size",
        "32768",
        "--epochs",
        "5",
        "--threads",
        "8",
        "--out",
        out.to_str().unwrap(),
    ])?)?;
    let speedup = num(&summary, &["speedup_fwd_bwd"])?;
    let (ls, ld) = (num(&summary, &["sparse_final_loss"])?, num(&summary, &["dense_final_loss"])?);
    ensure(speedup >= 1.5, || format!("forward+backward speedup {speedup:.2} < 1.5"))?;
    ensure((ls - ld).abs() <= 1e-8, || format!("final losses differ: {ls} vs {ld}"))?;
    within(Duration::from_secs(600), start)?;
    Ok(Verdict::Pass(format!(
        "forward+backward speedup {speedup:.2}x, final loss {ls:.10} vs {ld:.10}"
    )))
}

fn losses(log: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(log).map_err(|e| format!("{}: {e}", log.display()))?;
    text.lines().map(|l| json(l).and_then(|v| num(&v, &["loss"]))).collect()
}

fn c6_efficacy(tmp: &Path) -> Check {
    let start = Instant::now();
    let out = tmp.join("efficacy");
    let summary = json(&cli(&[
        "train",
        "--synthetic",
        "1000:20:5000",
        "--model",
        "transe",
        "--dim",
        "64",
        "--epochs",
        "200",
        "--lr",
        "0.01",
        "--batch-size",
        "1",
        "--resample-negatives",
        "--normalize-entities",
        "--eval-after",
        "--threads",
        "1",
        "--out",
        out.to_str().unwrap(),
    ])?)?;
    let loss = losses(&out.join("train_log.jsonl"))?;
    ensure(loss.len() == 200, || format!("{} epochs logged", loss.len()))?;
    let window = 10;
    let smoothed = loss[loss.len() - window..].iter().sum::<f64>() / window as f64;
    let drop = 1.0 - smoothed / loss[0];
    let hits10 = num(&summary, &["eval", "hits_at", "10"])?;
    ensure(drop >= 0.5, || format!("smoothed loss fell {:.1}% (epoch 1 {:.4}, last-10 mean {smoothed:.4})", drop * 100.0, loss[0]))?;
    ensure(hits10 >= 0.10, || format!("filtered Hits@10 {hits10:.3} < 0.10"))?;
    within(Duration::from_secs(300), start)?;
    Ok(Verdict::Pass(format!(
        "loss {:.4} -> {smoothed:.4} (-{:.0}%), filtered Hits@10 {hits10:.3}",
        loss[0],
        drop * 100.0
    )))
}

fn c7_wn18(tmp: &Path) -> Check {
    let Ok(dir) = std::env::var("SPARSEKGE_WN18_DIR") else {
        return Ok(Verdict::Skip("set SPARSEKGE_WN18_DIR to run (multi-hour); see scripts/wn18_parity.sh".into()));
    };
    let out = tmp.join("wn18");
    let summary = json(&cli(&[
        "train",
        "--dataset",
        &dir,
        "--model",
        "transe",
        "--dim",
        "512",
        "--margin",
        "0.5",
        "--lr",
        "4e-4",
        "--step-every",
        "50",
        "--step-factor",
        "0.5",
        "--epochs",
        "200",
        "--batch-size",
        "32768",
        "--resample-negatives",
        "--eval-after",
        "--out",
        out.to_str().unwrap(),
    ])?)?;
    let hits10 = num(&summary, &["eval", "hits_at", "10"])?;
    ensure(hits10 >= 0.67, || format!("filtered Hits@10 {hits10:.3} < 0.67"))?;
    Ok(Verdict::Pass(format!("filtered Hits@10 {hits10:.3}")))
}

fn c8_metrics() -> Check {
    let start = Instant::now();
    // Entities on a line at 0, 1, 3, 6, 10; one relation shifting by +2;
    // TransE L1 energy |h + 2 - t|.
    let config = ModelConfig::new(ModelKind::TransE, 1).with_norm(Norm::L1);
    let mut store = EmbeddingStore::<f64>::init(&config, 5, 1, 0).map_err(|e| e.to_string())?;
    store.entities_mut().data_mut().copy_from_slice(&[0.0, 1.0, 3.0, 6.0, 10.0]);
    store.relations_mut().data_mut().copy_from_slice(&[2.0]);
    let batch = |t: &[(usize, usize, usize)]| TripleBatch::from_triples(t, 5, 1).unwrap();
    let ds = Dataset {
        train: batch(&[(1, 0, 2)]),
        valid: batch(&[]),
        test: batch(&[(1, 0, 3), (0, 0, 2)]),
        entities: (0..5).map(|i| format!("e{i}")).collect(),
        relations: std::iter::once("r".to_string()).collect::<Vocab>(),
    };
    // Raw, head then tail per test triple:
    //   (1,0,3) head |x-4|: 3 scores 1, 6 scores 2 beat 3   -> rank 3
    //   (1,0,3) tail |3-x|: 1 scores 2, 3 scores 0 beat 3   -> rank 3
    //   (0,0,2) head |x-1|: 1 scores 0 beats 1               -> rank 2
    //   (0,0,2) tail |2-x|: nothing beats 1 (tie not counted) -> rank 1
    // Filtered drops the train triple (1,0,2) from both queries it appears in.
    let raw = rank_queries(&ds.test, &store, &config, None).map_err(|e| e.to_string())?;
    ensure(raw == vec![3, 3, 2, 1], || format!("raw ranks {raw:?}"))?;
    let filter = FilterIndex::from_dataset(&ds);
    let filtered = rank_queries(&ds.test, &store, &config, Some(&filter)).map_err(|e| e.to_string())?;
    ensure(filtered == vec![3, 2, 1, 1], || format!("filtered ranks {filtered:?}"))?;
    let expect = |r: &EvalReport, mrr: f64, h1: f64, h3: f64, h10: f64| {
        ensure(
            (r.mrr - mrr).abs() < 1e-12 && r.hits(1) == h1 && r.hits(3) == h3 && r.hits(10) == h10,
            || format!("{:?} report {r:?}", r.protocol),
        )
    };
    expect(&evaluate(&ds, &store, &config, Protocol::Raw).map_err(|e| e.to_string())?, 13.0 / 24.0, 0.25, 1.0, 1.0)?;
    expect(&evaluate(&ds, &store, &config, Protocol::Filtered).map_err(|e| e.to_string())?, 17.0 / 24.0, 0.5, 1.0, 1.0)?;

    let mut r = rng(8);
    let n = 1000;
    let config = ModelConfig::new(ModelKind::TransE, 16);
    let store = EmbeddingStore::<f64>::init(&config, n, 5, 99).map_err(|e| e.to_string())?;
    let queries = random_batch(ModelKind::TransE, n, 5, 1000, &mut r);
    let report = EvalReport::from_ranks(&rank_queries(&queries, &store, &config, None).map_err(|e| e.to_string())?, Protocol::Raw);
    let q = report.n_queries as f64;
    let sigma = (0.01f64 * 0.99 / q).sqrt();
    let h10 = report.hits(10);
    ensure((h10 - 0.01).abs() <= 3.0 * sigma, || format!("random Hits@10 {h10:.4}, 3 sigma = {:.4}", 3.0 * sigma))?;
    within(Duration::from_secs(10), start)?;
    Ok(Verdict::Pass(format!(
        "hand ranks, MRR 13/24 raw and 17/24 filtered; random Hits@10 {h10:.4} over {q} queries (3 sigma {:.4})",
        3.0 * sigma
    )))
}

fn c9_determinism(tmp: &Path) -> Check {
    let start = Instant::now();
    let run = |name: &str| -> Result<(Vec<u64>, Vec<u8>), String> {
        let out = tmp.join(name);
        cli(&[
            "train",
            "--synthetic",
            "300:10:1500",
            "--model",
            "transh",
            "--dim",
            "16",
            "--epochs",
            "20",
            "--batch-size",
            "64",
            "--lr",
            "0.05",
            "--seed",
            "7",
            "--resample-negatives",
            "--threads",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])?;
        let bits = losses(&out.join("train_log.jsonl"))?.iter().map(|l| l.to_bits()).collect();
        let ckpt = std::fs::read(out.join("checkpoint.bin")).map_err(|e| e.to_string())?;
        Ok((bits, ckpt))
    };
    let (la, ca) = run("det_a")?;
    let (lb, cb) = run("det_b")?;
    ensure(la.len() == 20, || format!("{} epochs logged", la.len()))?;
    ensure(la == lb, || "loss logs differ".into())?;
    ensure(ca == cb, || "checkpoints differ".into())?;
    within(Duration::from_secs(60), start)?;
    Ok(Verdict::Pass(format!("20 losses bitwise equal, checkpoints {} bytes identical", ca.len())))
}

fn main() -> ExitCode {
    // libtest's --list probing and filters do not apply to this target.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path().to_path_buf();
    type Criterion = (&'static str, Box<dyn Fn() -> Check>);
    let criteria: Vec<Criterion> = vec![
        ("incidence golden rows", Box::new(c1_incidence)),
        ("sparse engine equals dense oracle", Box::new(c2_oracle)),
        ("adjoint identity and finite differences", Box::new(c3_gradients)),
        ("spmm time scales linearly in M and d", Box::new(c4_complexity)),
        ("sparse beats dense baseline by 1.5x", Box::new({
            let d = dir.clone();
            move || c5_speedup(&d)
        })),
        ("training efficacy on planted data", Box::new({
            let d = dir.clone();
            move || c6_efficacy(&d)
        })),
        ("WN18 parity", Box::new({
            let d = dir.clone();
            move || c7_wn18(&d)
        })),
        ("ranking metrics", Box::new(c8_metrics)),
        ("training is deterministic", Box::new({
            let d = dir.clone();
            move || c9_determinism(&d)
        })),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(Verdict::Pass(detail)) => println!("PASS [{}] {name} ({secs:.1}s): {detail}", i + 1),
            Ok(Verdict::Skip(why)) => println!("SKIP [{}] {name}: {why}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
