//! TSV triple datasets and the planted-structure synthetic generator.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::TripleBatch;

pub const SPLITS: [&str; 3] = ["train", "valid", "test"];

/// Name ↔ dense id map in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Id of `name`, assigning the next one on first sight.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }
}

impl FromIterator<String> for Vocab {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        let mut v = Vocab::default();
        for name in iter {
            v.intern(&name);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: TripleBatch,
    pub valid: TripleBatch,
    pub test: TripleBatch,
    pub entities: Vocab,
    pub relations: Vocab,
}

impl Dataset {
    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn splits(&self) -> [(&'static str, &TripleBatch); 3] {
        [("train", &self.train), ("valid", &self.valid), ("test", &self.test)]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Error on out-of-vocabulary valid/test triples instead of dropping them.
    pub strict: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub n_entities: usize,
    pub n_relations: usize,
    pub counts: SplitCounts,
    pub dropped: SplitCounts,
}

impl LoadReport {
    pub fn of(ds: &Dataset) -> Self {
        Self {
            n_entities: ds.num_entities(),
            n_relations: ds.num_relations(),
            counts: SplitCounts {
                train: ds.train.len(),
                valid: ds.valid.len(),
                test: ds.test.len(),
            },
            dropped: SplitCounts::default(),
        }
    }
}

type NamedTriple = (String, String, String);

fn parse_split(path: &Path) -> Result<Vec<NamedTriple>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Dataset(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            fields = line.split_whitespace().collect();
        }
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: n + 1,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        out.push((fields[0].trim().to_owned(), fields[1].trim().to_owned(), fields[2].trim().to_owned()));
    }
    Ok(out)
}

/// Reads an `id<TAB>name` dictionary; ids must be `0..n` in order.
fn read_dict(path: &Path) -> Result<Vocab> {
    let text = fs::read_to_string(path)?;
    let mut vocab = Vocab::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_owned(),
            line: n + 1,
            msg,
        };
        let (id, name) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `id<TAB>name`".into()))?;
        let id: usize = id.trim().parse().map_err(|_| parse_err(format!("bad id `{id}`")))?;
        if id != vocab.len() || vocab.id(name).is_some() {
            return Err(parse_err(format!("id {id} out of sequence or duplicate name")));
        }
        vocab.intern(name);
    }
    Ok(vocab)
}

pub fn load_tsv(dir: impl AsRef<Path>) -> Result<Dataset> {
    load_tsv_with(dir, LoadOptions::default()).map(|(ds, _)| ds)
}

/// Loads `train.txt`, `valid.txt` and `test.txt` from `dir`.
///
/// Ids follow first appearance across train, valid, test unless
/// `entities.dict` / `relations.dict` are present, in which case those fix
/// the vocabulary. A valid/test triple naming something absent from train
/// (or from the dictionaries) is dropped, or rejected under `strict`.
pub fn load_tsv_with(dir: impl AsRef<Path>, opts: LoadOptions) -> Result<(Dataset, LoadReport)> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::Dataset(format!("{} is not a directory", dir.display())));
    }
    let raw: Vec<Vec<NamedTriple>> = SPLITS
        .iter()
        .map(|s| parse_split(&dir.join(format!("{s}.txt"))))
        .collect::<Result<_>>()?;
    if raw[0].is_empty() {
        return Err(Error::Dataset("train split is empty".into()));
    }

    let dict_paths = [dir.join("entities.dict"), dir.join("relations.dict")];
    let fixed = dict_paths.iter().all(|p| p.is_file());
    let (mut entities, mut relations) = if fixed {
        (read_dict(&dict_paths[0])?, read_dict(&dict_paths[1])?)
    } else {
        (Vocab::default(), Vocab::default())
    };
    if !fixed {
        for (h, r, t) in raw.iter().flatten() {
            entities.intern(h);
            relations.intern(r);
            entities.intern(t);
        }
    }

    let (n, nr) = (entities.len(), relations.len());
    let mut seen_e = HashSet::new();
    let mut seen_r = HashSet::new();
    let mut batches = Vec::with_capacity(3);
    let mut dropped = [0usize; 3];
    for (si, split) in raw.iter().enumerate() {
        let mut batch = TripleBatch::empty(n, nr);
        for (h, r, t) in split {
            let ids = (entities.id(h), relations.id(r), entities.id(t));
            let known = match ids {
                (Some(hi), Some(ri), Some(ti)) if si == 0 => Some((hi, ri, ti)),
                (Some(hi), Some(ri), Some(ti))
                    if seen_e.contains(&hi) && seen_r.contains(&ri) && seen_e.contains(&ti) =>
                {
                    Some((hi, ri, ti))
                }
                _ => None,
            };
            match known {
                Some((hi, ri, ti)) => {
                    if si == 0 {
                        seen_e.extend([hi, ti]);
                        seen_r.insert(ri);
                    }
                    batch.push(hi, ri, ti)?;
                }
                None if si == 0 => {
                    return Err(Error::Dataset(format!("train triple ({h}, {r}, {t}) is not in the dictionaries")));
                }
                None if opts.strict => {
                    return Err(Error::Dataset(format!(
                        "{} triple ({h}, {r}, {t}) names something absent from train",
                        SPLITS[si]
                    )));
                }
                None => dropped[si] += 1,
            }
        }
        if dropped[si] > 0 {
            log::warn!("dropped {} out-of-vocabulary {} triples", dropped[si], SPLITS[si]);
        }
        batches.push(batch);
    }

    let test = batches.pop().expect("three splits");
    let valid = batches.pop().expect("three splits");
    let train = batches.pop().expect("three splits");
    let ds = Dataset {
        train,
        valid,
        test,
        entities,
        relations,
    };
    let mut report = LoadReport::of(&ds);
    report.dropped = SplitCounts {
        train: 0,
        valid: dropped[1],
        test: dropped[2],
    };
    Ok((ds, report))
}

/// Writes the three splits plus `entities.dict` and `relations.dict`, so a
/// reload reproduces the same ids.
pub fn write_tsv(ds: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let name = |v: &Vocab, id: usize| v.name(id).map(str::to_owned).unwrap_or_else(|| id.to_string());
    for (split, batch) in ds.splits() {
        let mut w = BufWriter::new(fs::File::create(dir.join(format!("{split}.txt")))?);
        for (h, r, t) in batch.iter() {
            writeln!(w, "{}\t{}\t{}", name(&ds.entities, h), name(&ds.relations, r), name(&ds.entities, t))?;
        }
        w.flush()?;
    }
    for (file, vocab) in [("entities.dict", &ds.entities), ("relations.dict", &ds.relations)] {
        let mut w = BufWriter::new(fs::File::create(dir.join(file))?);
        for (i, n) in vocab.names().iter().enumerate() {
            writeln!(w, "{i}\t{n}")?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Held-out size for each of valid and test.
pub fn held_out_size(n_triples: usize) -> usize {
    (n_triples / 10).max(1)
}

/// Planted translational structure.
///
/// Entities sit on distinct points of a 3-D integer lattice and each
/// relation is a fixed nonzero lattice offset, so `(h, r, t)` holds exactly
/// when `pos(t) = pos(h) + offset(r)`. `n_triples` true triples go to train
/// and `held_out_size(n_triples)` more to each of valid and test.
pub fn generate_synthetic(n_entities: usize, n_relations: usize, n_triples: usize, seed: u64) -> Result<Dataset> {
    if n_entities < 2 || n_relations == 0 || n_triples == 0 {
        return Err(Error::Dataset(format!(
            "synthetic data needs ≥ 2 entities, ≥ 1 relation and ≥ 1 triple; got {n_entities}:{n_relations}:{n_triples}"
        )));
    }
    let held = held_out_size(n_triples);
    let total = n_triples + 2 * held;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let side = (1..).find(|s: &i64| (s * s * s) as usize >= n_entities).expect("unbounded search");
    let mut points: Vec<[i64; 3]> = (0..side * side * side)
        .map(|i| [i % side, (i / side) % side, i / (side * side)])
        .collect();
    // fill the lattice compactly, then assign points to ids at random
    points.truncate(n_entities);
    points.shuffle(&mut rng);
    let at: HashMap<[i64; 3], usize> = points.iter().enumerate().map(|(e, &p)| (p, e)).collect();

    // Widen the offset radius until enough distinct offsets exist.
    let mut radius = 1i64;
    let offsets = loop {
        let mut cands: Vec<[i64; 3]> = Vec::new();
        for x in -radius..=radius {
            for y in -radius..=radius {
                for z in -radius..=radius {
                    if [x, y, z] != [0, 0, 0] {
                        cands.push([x, y, z]);
                    }
                }
            }
        }
        if cands.len() >= n_relations {
            cands.shuffle(&mut rng);
            cands.truncate(n_relations);
            break cands;
        }
        if radius >= side {
            return Err(Error::Dataset(format!("cannot place {n_relations} distinct relations on a side-{side} lattice")));
        }
        radius += 1;
    };

    let mut feasible = Vec::new();
    for (h, p) in points.iter().enumerate() {
        for (r, o) in offsets.iter().enumerate() {
            if let Some(&t) = at.get(&[p[0] + o[0], p[1] + o[1], p[2] + o[2]]) {
                feasible.push((h, r, t));
            }
        }
    }
    feasible.shuffle(&mut rng);
    if feasible.len() < total {
        return Err(too_few(n_triples, held, feasible.len()));
    }
    // held-out triples only use entities and relations seen in train
    let (train, rest) = feasible.split_at(n_triples);
    let seen_e: HashSet<usize> = train.iter().flat_map(|&(h, _, t)| [h, t]).collect();
    let seen_r: HashSet<usize> = train.iter().map(|&(_, r, _)| r).collect();
    let held_out: Vec<_> = rest
        .iter()
        .copied()
        .filter(|(h, r, t)| seen_e.contains(h) && seen_r.contains(r) && seen_e.contains(t))
        .take(2 * held)
        .collect();
    if held_out.len() < 2 * held {
        return Err(too_few(n_triples, held, n_triples + held_out.len()));
    }

    let split = |ts: &[(usize, usize, usize)]| TripleBatch::from_triples(ts, n_entities, n_relations);
    Ok(Dataset {
        train: split(train)?,
        valid: split(&held_out[..held])?,
        test: split(&held_out[held..])?,
        entities: (0..n_entities).map(|i| format!("e{i}")).collect(),
        relations: (0..n_relations).map(|i| format!("r{i}")).collect(),
    })
}

fn too_few(n_triples: usize, held: usize, available: usize) -> Error {
    Error::Dataset(format!(
        "requested {n_triples} train + {} held-out triples but the planted structure supports only {available}",
        2 * held
    ))
}
