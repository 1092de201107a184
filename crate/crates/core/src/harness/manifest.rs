use super::{ExperimentConfig, HarnessError};
use crate::mesh::{load_mesh, MeshFormat};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Ordered `key = value` lines. Setting an existing key replaces it in place.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let (key, value) = (key.into(), value.into());
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// `(file name, sha256)` for every hashed file.
    pub fn files(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().filter_map(|(k, v)| {
            k.strip_prefix("file.")
                .and_then(|n| n.strip_suffix(".sha256"))
                .map(|n| (n, v.as_str()))
        })
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

impl FromStr for Manifest {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut m = Manifest::default();
        for (i, line) in s.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| HarnessError::Verify(format!("manifest line {} is not 'key = value'", i + 1)))?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }
}

/// What [`verify`] looked at.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub status: String,
    pub files_checked: usize,
    pub rows_checked: usize,
    pub envelope_checked: bool,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "status = {}", self.status)?;
        writeln!(f, "files_checked = {}", self.files_checked)?;
        writeln!(f, "rows_checked = {}", self.rows_checked)?;
        writeln!(f, "envelope_checked = {}", self.envelope_checked)
    }
}

fn read(dir: &Path, name: &str) -> Result<String, HarnessError> {
    let p = dir.join(name);
    std::fs::read_to_string(&p).map_err(|e| HarnessError::io(p, e))
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn parse(name: &str, text: &str) -> Result<Self, HarnessError> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| HarnessError::Verify(format!("{name} is empty")))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| HarnessError::Verify(format!("{name} row {}: {e}", i + 1)))?;
            if row.len() != header.len() {
                return Err(HarnessError::Verify(format!("{name} row {} has {} columns", i + 1, row.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    fn col(&self, name: &str) -> Result<Vec<f64>, HarnessError> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Verify(format!("missing column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }
}

fn key_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.split_once(" = ").filter(|(k, _)| *k == key).map(|(_, v)| v))
}

/// Re-checks an artifact directory: manifest hashes, the config and mesh, and the trajectory
/// invariants (`t` increasing, `E ≥ 0`, `E` nonincreasing and `D ≥ 0` up to `1e-9·E(0)`, and
/// `E ≤ S` after `T0` when the certificate claims it).
///
/// A directory whose manifest records a failed stage verifies if its hashes match; the
/// content checks then apply only to what was written.
pub fn verify(dir: &Path) -> Result<VerifyReport, HarnessError> {
    let manifest: Manifest = read(dir, "manifest.txt")?.parse()?;
    let status = manifest
        .get("status")
        .ok_or_else(|| HarnessError::Verify("manifest has no status".into()))?
        .to_string();
    let mut files_checked = 0;
    for (name, hash) in manifest.files() {
        let bytes = std::fs::read(dir.join(name)).map_err(|e| HarnessError::io(dir.join(name), e))?;
        if sha256_hex(&bytes) != hash {
            return Err(HarnessError::Verify(format!("hash mismatch for {name}")));
        }
        files_checked += 1;
    }
    let listed: Vec<&str> = manifest.files().map(|(n, _)| n).collect();
    if status == "ok" {
        for required in [
            "config.toml",
            "validation.txt",
            "mesh.off",
            "admissibility.txt",
            "regions.csv",
            "trajectory.csv",
            "envelope.csv",
            "certification.txt",
        ] {
            if !listed.contains(&required) {
                return Err(HarnessError::Verify(format!("{required} missing from a complete run")));
            }
        }
    }

    if listed.contains(&"config.toml") {
        ExperimentConfig::from_toml(&read(dir, "config.toml")?, &[])?;
    }
    if listed.contains(&"mesh.off") {
        let mesh = load_mesh(&dir.join("mesh.off"), MeshFormat::Off)?;
        if listed.contains(&"validation.txt") {
            let v = read(dir, "validation.txt")?;
            if key_value(&v, "V") != Some(&mesh.num_vertices().to_string()) {
                return Err(HarnessError::Verify("validation.txt disagrees with mesh.off".into()));
            }
        }
    }

    let mut rows_checked = 0;
    if listed.contains(&"trajectory.csv") {
        let traj = Table::parse("trajectory.csv", &read(dir, "trajectory.csv")?)?;
        let (t, e, d) = (traj.col("t")?, traj.col("E")?, traj.col("dissipated_increment")?);
        let e0 = *e.first().ok_or_else(|| HarnessError::Verify("trajectory.csv has no rows".into()))?;
        let slack = 1e-9 * e0;
        for i in 0..t.len() {
            if !(e[i] >= 0.0) || !(d[i] >= -slack) {
                return Err(HarnessError::Verify(format!("row {}: E = {}, D = {}", i + 1, e[i], d[i])));
            }
            if i > 0 && (!(t[i] > t[i - 1]) || e[i] > e[i - 1] + slack) {
                return Err(HarnessError::Verify(format!("row {}: time or energy out of order", i + 1)));
            }
        }
        rows_checked = t.len();
    }

    let mut envelope_checked = false;
    if listed.contains(&"certification.txt") && listed.contains(&"envelope.csv") {
        let cert = read(dir, "certification.txt")?;
        if key_value(&cert, "envelope_ok") == Some("true") {
            let t0: f64 = key_value(&cert, "T0")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| HarnessError::Verify("certification.txt has no T0".into()))?;
            let env = Table::parse("envelope.csv", &read(dir, "envelope.csv")?)?;
            let (t, s, e) = (env.col("t")?, env.col("S")?, env.col("E")?);
            for i in 0..t.len() {
                if t[i] > t0 && e[i] > s[i] * (1.0 + 1e-9) {
                    return Err(HarnessError::Verify(format!("E > S at t = {}", t[i])));
                }
            }
            envelope_checked = true;
        }
    }

    Ok(VerifyReport {
        status,
        files_checked,
        rows_checked,
        envelope_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip_and_replace() {
        let mut m = Manifest::default();
        m.set("status", "running");
        m.set("file.a.csv.sha256", sha256_hex(b"abc"));
        m.set("status", "ok");
        let text = m.to_string();
        assert!(text.starts_with("status = ok\n"));
        let back: Manifest = text.parse().unwrap();
        assert_eq!(back, m);
        assert_eq!(
            back.files().collect::<Vec<_>>(),
            vec![("a.csv", "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")]
        );
    }

    #[test]
    fn malformed_manifest_is_rejected() {
        assert!("status ok".parse::<Manifest>().is_err());
    }
}
