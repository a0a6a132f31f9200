//! CSV output. Every file starts with `#` comment lines carrying the config
//! hash and seed; floats use nine significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::baselines::BaselineRun;
use crate::channel::LinkType;
use crate::env::StepOutcome;
use crate::error::Result;
use crate::marl::trainer::{EpisodeLog, UpdateLog};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Header comment lines written before the CSV body.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub run_id: String,
}

pub struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    pub fn create(path: &Path, prov: &Provenance, header: &[String]) -> Result<Self> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "# run_id={}", prov.run_id)?;
        writeln!(file, "# config_hash={}", prov.config_hash)?;
        writeln!(file, "# seed={}", prov.seed)?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        Ok(CsvSink { writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Reads a CSV written by [`CsvSink`], skipping the comment lines.
pub fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}

fn hops(kinds: &[LinkType]) -> String {
    kinds.iter().map(|k| k.as_str()).collect::<Vec<_>>().join("|")
}

fn assoc_label(indices: &[usize]) -> String {
    indices.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("-")
}

/// Per-slot schema shared by evaluation and baseline runs.
pub fn slot_header(paths: usize) -> Vec<String> {
    let mut h: Vec<String> = ["run_id", "episode", "slot"].map(String::from).to_vec();
    for j in 0..paths {
        h.push(format!("e2e_bps_{j}"));
    }
    h.push("sum_bps".into());
    for j in 0..paths {
        h.push(format!("power_w_{j}"));
    }
    h.push("reward".into());
    for j in 0..paths {
        h.push(format!("links_{j}"));
        h.push(format!("assoc_{j}"));
        h.push(format!("x_m_{j}"));
        h.push(format!("y_m_{j}"));
    }
    h
}

/// One row per (episode, slot), assembled from whichever source produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub run_id: String,
    pub episode: usize,
    pub slot: usize,
    pub e2e: Vec<f64>,
    pub power: Vec<Option<f64>>,
    pub reward: Option<f64>,
    pub links: Vec<String>,
    pub assoc: Vec<String>,
    pub xy: Vec<Option<(f64, f64)>>,
}

impl MetricsRow {
    pub fn from_step(run_id: &str, episode: usize, step: &StepOutcome) -> Self {
        MetricsRow {
            run_id: run_id.to_string(),
            episode,
            slot: step.slot,
            e2e: step.paths.iter().map(|p| p.e2e).collect(),
            power: step.powers.iter().map(|&p| Some(p)).collect(),
            reward: Some(step.reward),
            links: step.paths.iter().map(|p| hops(&p.link_types)).collect(),
            assoc: step.associations.iter().map(|a| assoc_label(&[a.lane1, a.lane2])).collect(),
            xy: step.positions.iter().map(|q| Some((q.x, q.y))).collect(),
        }
    }

    pub fn from_baseline(run: &BaselineRun) -> Vec<Self> {
        run.slots
            .iter()
            .map(|s| MetricsRow {
                run_id: run.label.clone(),
                episode: 0,
                slot: s.slot,
                e2e: s.path_e2e.clone(),
                power: vec![None; s.path_e2e.len()],
                reward: None,
                links: s.link_types.iter().map(|k| hops(k)).collect(),
                assoc: s.associations.iter().map(|a| assoc_label(a)).collect(),
                xy: (0..s.path_e2e.len()).map(|j| s.relays.get(j).map(|q| (q.x, q.y))).collect(),
            })
            .collect()
    }

    pub fn fields(&self) -> Vec<String> {
        let mut f = vec![self.run_id.clone(), self.episode.to_string(), self.slot.to_string()];
        f.extend(self.e2e.iter().map(|&x| fmt_f64(x)));
        f.push(fmt_f64(self.e2e.iter().sum()));
        f.extend(self.power.iter().map(|&p| fmt_opt(p)));
        f.push(fmt_opt(self.reward));
        for j in 0..self.e2e.len() {
            f.push(self.links[j].clone());
            f.push(self.assoc[j].clone());
            f.push(fmt_opt(self.xy[j].map(|p| p.0)));
            f.push(fmt_opt(self.xy[j].map(|p| p.1)));
        }
        f
    }
}

pub fn write_slot_rows(path: &Path, prov: &Provenance, rows: &[MetricsRow]) -> Result<()> {
    let paths = rows.first().map_or(0, |r| r.e2e.len());
    let mut sink = CsvSink::create(path, prov, &slot_header(paths))?;
    for r in rows {
        sink.row(&r.fields())?;
    }
    sink.finish()
}

pub fn write_training_curves(path: &Path, prov: &Provenance, episodes: &[EpisodeLog]) -> Result<()> {
    let header = [
        "episode",
        "worker",
        "updates_before",
        "cumulative_reward",
        "mean_sum_bps",
        "mean_power_w",
        "ee_bits_per_j",
    ]
    .map(String::from);
    let mut sink = CsvSink::create(path, prov, &header)?;
    for e in episodes {
        sink.row(&[
            e.episode.to_string(),
            e.worker.to_string(),
            e.updates_before.to_string(),
            fmt_f64(e.cumulative_reward),
            fmt_f64(e.totals.mean_sum_throughput),
            fmt_f64(e.totals.mean_power),
            fmt_opt(e.totals.efficiency),
        ])?;
    }
    sink.finish()
}

pub fn write_update_log(path: &Path, prov: &Provenance, updates: &[UpdateLog]) -> Result<()> {
    let agents = updates.first().map_or(0, |u| u.actor_loss.len());
    let mut header: Vec<String> = ["update", "transitions", "critic_loss"].map(String::from).to_vec();
    header.extend((0..agents).map(|j| format!("actor_loss_{j}")));
    header.push("mean_advantage".into());
    let mut sink = CsvSink::create(path, prov, &header)?;
    for u in updates {
        let mut f = vec![u.update.to_string(), u.transitions.to_string(), fmt_f64(u.critic_loss)];
        f.extend(u.actor_loss.iter().map(|&x| fmt_f64(x)));
        f.push(fmt_f64(u.mean_advantage));
        sink.row(&f)?;
    }
    sink.finish()
}

/// Fraction of path-slots using FSO on each hop.
pub fn fso_share(link_types: impl IntoIterator<Item = Vec<LinkType>>) -> Vec<f64> {
    let mut fso: Vec<usize> = Vec::new();
    let mut total = 0usize;
    for kinds in link_types {
        if fso.len() < kinds.len() {
            fso.resize(kinds.len(), 0);
        }
        for (c, k) in fso.iter_mut().zip(&kinds) {
            *c += usize::from(*k == LinkType::Fso);
        }
        total += 1;
    }
    fso.into_iter().map(|c| if total > 0 { c as f64 / total as f64 } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_f64(1234.5678912345), "1.23456789e3");
        assert_eq!(fmt_f64(0.0), "0.00000000e0");
        assert_eq!(fmt_f64(-2.5e-7), "-2.50000000e-7");
    }

    #[test]
    fn header_comments_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let prov = Provenance { config_hash: "ab".into(), seed: 3, run_id: "r".into() };
        let mut sink = CsvSink::create(&path, &prov, &["a".to_string(), "b".to_string()]).unwrap();
        sink.row(&["1".to_string(), "2".to_string()]).unwrap();
        sink.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# run_id=r\n# config_hash=ab\n# seed=3\n"));
        let (header, rows) = read_rows(&path).unwrap();
        assert_eq!(header, vec!["a", "b"]);
        assert_eq!(rows, vec![vec!["1", "2"]]);
    }

    #[test]
    fn fso_share_counts() {
        use LinkType::*;
        let share = fso_share(vec![vec![Fso, Rf], vec![Fso, Fso], vec![Rf, Rf], vec![Fso, Rf]]);
        assert_eq!(share, vec![0.75, 0.25]);
    }
}
