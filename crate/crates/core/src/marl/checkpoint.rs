//! Portable parameter files.
//!
//! ```text
//! ntn-checkpoint v1
//! seed 7
//! config_hash 3f2a...
//! net actor_0 30,128,128,28
//! net actor_1 30,128,128,28
//! net critic 116,128,128,1
//! data
//! <little-endian f64 parameters, nets in header order>
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::marl::mlp::Mlp;

const MAGIC: &str = "ntn-checkpoint v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub seed: u64,
    pub config_hash: String,
    /// Named networks in file order.
    pub nets: Vec<(String, Mlp)>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn net(&self, name: &str) -> Result<&Mlp> {
        self.nets
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| bad(format!("no network named {name}")))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "seed {}", self.seed)?;
        writeln!(w, "config_hash {}", self.config_hash)?;
        for (name, net) in &self.nets {
            if name.contains(char::is_whitespace) || name.is_empty() {
                return Err(bad(format!("invalid network name {name:?}")));
            }
            let sizes: Vec<String> = net.sizes().iter().map(usize::to_string).collect();
            writeln!(w, "net {name} {}", sizes.join(","))?;
        }
        writeln!(w, "data")?;
        for (_, net) in &self.nets {
            for p in net.params() {
                w.write_all(&p.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        let mut next_line = |r: &mut R| -> Result<String> {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(bad("unexpected end of header"));
            }
            Ok(line.trim_end_matches('\n').to_string())
        };
        if next_line(&mut r)? != MAGIC {
            return Err(bad("missing checkpoint magic line"));
        }
        let mut seed = None;
        let mut config_hash = None;
        let mut shapes: Vec<(String, Vec<usize>)> = Vec::new();
        loop {
            let l = next_line(&mut r)?;
            let mut parts = l.split_whitespace();
            match parts.next() {
                Some("seed") => {
                    seed = Some(parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad seed line"))?)
                }
                Some("config_hash") => config_hash = Some(parts.next().unwrap_or("").to_string()),
                Some("net") => {
                    let name = parts.next().ok_or_else(|| bad("net line without name"))?.to_string();
                    let sizes = parts
                        .next()
                        .ok_or_else(|| bad("net line without shape"))?
                        .split(',')
                        .map(|s| s.parse::<usize>().map_err(|_| bad(format!("bad layer size {s:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    shapes.push((name, sizes));
                }
                Some("data") => break,
                _ => return Err(bad(format!("unrecognized header line {l:?}"))),
            }
        }
        let mut blob = Vec::new();
        r.read_to_end(&mut blob)?;
        let mut floats = blob.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        if blob.len() % 8 != 0 {
            return Err(bad("parameter blob is not a whole number of f64 values"));
        }
        let mut nets = Vec::with_capacity(shapes.len());
        let mut used = 0;
        for (name, sizes) in shapes {
            let count = Mlp::zeros(&sizes)?.num_params();
            let params: Vec<f64> = floats.by_ref().take(count).collect();
            if params.len() != count {
                return Err(bad(format!("parameter blob too short for {name}")));
            }
            used += count;
            nets.push((name, Mlp::from_parts(&sizes, params)?));
        }
        if used * 8 != blob.len() {
            return Err(bad(format!("{} trailing bytes after parameters", blob.len() - used * 8)));
        }
        Ok(Checkpoint {
            seed: seed.ok_or_else(|| bad("missing seed"))?,
            config_hash: config_hash.ok_or_else(|| bad("missing config_hash"))?,
            nets,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Checkpoint::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        Checkpoint {
            seed: 42,
            config_hash: "abc123".into(),
            nets: vec![
                ("actor_0".into(), Mlp::new(&[4, 3, 2], &mut rng).unwrap()),
                ("critic".into(), Mlp::new(&[6, 5, 1], &mut rng).unwrap()),
            ],
        }
    }

    #[test]
    fn roundtrip() {
        let ck = sample();
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        let back = Checkpoint::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.net("critic").unwrap().sizes(), &[6, 5, 1]);
        assert!(back.net("actor_9").is_err());
    }

    #[test]
    fn rejects_damage() {
        let mut buf = Vec::new();
        sample().write_to(&mut buf).unwrap();
        assert!(Checkpoint::read_from(&buf[..buf.len() - 8]).is_err());
        let mut extra = buf.clone();
        extra.extend_from_slice(&[0; 8]);
        assert!(Checkpoint::read_from(extra.as_slice()).is_err());
        assert!(Checkpoint::read_from(&b"nope\n"[..]).is_err());
    }
}
