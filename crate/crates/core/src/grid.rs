//! Uniform `(ρ, φ, z)` lattices and sampled complex fields.
//!
//! Values are stored `ρ`-major: index `(i, j, k) -> (i * n_phi + j) * n_z + k`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("bad grid spacing: {0}")]
    Spacing(String),
    #[error("grid touches the axis: {0}")]
    Axis(String),
    #[error("value array does not match the lattice: {0}")]
    Shape(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type GridResult<T> = Result<T, GridError>;

/// Lattice `ρ ∈ [rho_min, rho_max]`, `φ ∈ [0, 2π)` (periodic), `z ∈ [z_min, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub n_phi: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub n_z: usize,
}

impl GridSpec {
    pub fn new(rho: (f64, f64), n_rho: usize, n_phi: usize, z: (f64, f64), n_z: usize) -> GridResult<Self> {
        let g = GridSpec { rho_min: rho.0, rho_max: rho.1, n_rho, n_phi, z_min: z.0, z_max: z.1, n_z };
        g.validate()?;
        Ok(g)
    }

    /// Lattice with spacing `h` in both `ρ` and `z`. The upper ends are moved
    /// down onto the lattice if `h` does not divide the ranges.
    pub fn with_step(rho: (f64, f64), z: (f64, f64), h: f64, n_phi: usize) -> GridResult<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(GridError::Spacing(format!("h = {h}")));
        }
        let n = |lo: f64, hi: f64| ((hi - lo) / h + 1e-9).floor() as usize + 1;
        let (nr, nz) = (n(rho.0, rho.1), n(z.0, z.1));
        let (rmax, zmax) = (rho.0 + (nr as f64 - 1.0) * h, z.0 + (nz as f64 - 1.0) * h);
        Self::new((rho.0, rmax), nr, n_phi, (z.0, zmax), nz)
    }

    pub fn validate(&self) -> GridResult<()> {
        let all = [self.rho_min, self.rho_max, self.z_min, self.z_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GridError::Spacing(format!("non-finite bounds in {self:?}")));
        }
        if self.n_rho < 3 || self.n_z < 3 || self.n_phi < 3 {
            return Err(GridError::Spacing("need at least 3 points per axis".into()));
        }
        if !(self.rho_max > self.rho_min) || !(self.z_max > self.z_min) {
            return Err(GridError::Spacing(format!("empty range in {self:?}")));
        }
        if self.rho_min < self.h_rho() * (1.0 - 1e-12) {
            return Err(GridError::Axis(format!(
                "rho_min = {} must be at least one cell ({}) away from the axis",
                self.rho_min,
                self.h_rho()
            )));
        }
        Ok(())
    }

    pub fn h_rho(&self) -> f64 {
        (self.rho_max - self.rho_min) / (self.n_rho as f64 - 1.0)
    }

    pub fn h_phi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn h_z(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_z as f64 - 1.0)
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho_min + i as f64 * self.h_rho()
    }

    pub fn phi(&self, j: usize) -> f64 {
        j as f64 * self.h_phi()
    }

    pub fn z(&self, k: usize) -> f64 {
        self.z_min + k as f64 * self.h_z()
    }

    pub fn len(&self) -> usize {
        self.n_rho * self.n_phi * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_phi + j) * self.n_z + k
    }
}

/// What a field is, with enough numbers to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModeDescriptor {
    Cylindrical {
        m: i32,
        k: f64,
        #[serde(rename = "E")]
        e: f64,
        #[serde(rename = "K")]
        big_k: f64,
    },
    Parabolic {
        m: i32,
        #[serde(rename = "E")]
        e: f64,
        #[serde(rename = "K")]
        big_k: f64,
        #[serde(rename = "C")]
        c: f64,
        /// Translation along `z` (0 for the untranslated solution).
        shift: f64,
    },
    Custom {
        label: String,
        #[serde(rename = "E")]
        e: f64,
        #[serde(rename = "K")]
        big_k: f64,
    },
}

impl ModeDescriptor {
    pub fn energy(&self) -> f64 {
        match self {
            ModeDescriptor::Cylindrical { e, .. } | ModeDescriptor::Parabolic { e, .. } | ModeDescriptor::Custom { e, .. } => *e,
        }
    }

    pub fn strength(&self) -> f64 {
        match self {
            ModeDescriptor::Cylindrical { big_k, .. }
            | ModeDescriptor::Parabolic { big_k, .. }
            | ModeDescriptor::Custom { big_k, .. } => *big_k,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModeDescriptor::Cylindrical { m, k, e, big_k } => format!("cyl m={m} k={k} E={e} K={big_k}"),
            ModeDescriptor::Parabolic { m, e, big_k, c, shift } => {
                format!("par m={m} E={e} K={big_k} C={c} shift={shift}")
            }
            ModeDescriptor::Custom { label, .. } => label.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
    pub mode: ModeDescriptor,
}

impl FieldGrid {
    pub fn new(spec: GridSpec, values: Vec<Complex64>, mode: ModeDescriptor) -> GridResult<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(GridError::Shape(format!("{} values for {} lattice points", values.len(), spec.len())));
        }
        Ok(FieldGrid { spec, values, mode })
    }

    /// Sample `f(ρ, φ, z)` at every lattice point, in parallel over `ρ`.
    pub fn sample<E, F>(spec: GridSpec, mode: ModeDescriptor, f: F) -> Result<Self, E>
    where
        E: From<GridError> + Send,
        F: Fn(f64, f64, f64) -> Result<Complex64, E> + Sync,
    {
        spec.validate()?;
        let rows: Vec<Vec<Complex64>> = (0..spec.n_rho)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(spec.n_phi * spec.n_z);
                for j in 0..spec.n_phi {
                    for k in 0..spec.n_z {
                        row.push(f(spec.rho(i), spec.phi(j), spec.z(k))?);
                    }
                }
                Ok(row)
            })
            .collect::<Result<_, E>>()?;
        Ok(FieldGrid { spec, values: rows.concat(), mode })
    }

    /// Sample `f(ρ, z) e^{imφ}`; `f` is evaluated once per `(ρ, z)` pair.
    pub fn sample_azimuthal<E, F>(spec: GridSpec, mode: ModeDescriptor, m: i32, f: F) -> Result<Self, E>
    where
        E: From<GridError> + Send,
        F: Fn(f64, f64) -> Result<Complex64, E> + Sync,
    {
        spec.validate()?;
        let phases: Vec<Complex64> = (0..spec.n_phi).map(|j| Complex64::from_polar(1.0, m as f64 * spec.phi(j))).collect();
        let rows: Vec<Vec<Complex64>> = (0..spec.n_rho)
            .into_par_iter()
            .map(|i| {
                let line: Vec<Complex64> = (0..spec.n_z).map(|k| f(spec.rho(i), spec.z(k))).collect::<Result<_, E>>()?;
                let mut row = Vec::with_capacity(spec.n_phi * spec.n_z);
                for p in &phases {
                    row.extend(line.iter().map(|v| v * p));
                }
                Ok(row)
            })
            .collect::<Result<_, E>>()?;
        Ok(FieldGrid { spec, values: rows.concat(), mode })
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[self.spec.index(i, j, k)]
    }

    /// CSV with columns `rho, phi, z, re_psi, im_psi` and, optionally,
    /// `eta, xi`. Numbers carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W, parabolic_columns: bool) -> GridResult<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| GridError::Io(e.to_string());
        let mut header = vec!["rho", "phi", "z", "re_psi", "im_psi"];
        if parabolic_columns {
            header.extend(["eta", "xi"]);
        }
        wr.write_record(&header).map_err(io)?;
        let s = &self.spec;
        for i in 0..s.n_rho {
            for j in 0..s.n_phi {
                for k in 0..s.n_z {
                    let v = self.at(i, j, k);
                    let (rho, z) = (s.rho(i), s.z(k));
                    let mut rec = vec![fmt17(rho), fmt17(s.phi(j)), fmt17(z), fmt17(v.re), fmt17(v.im)];
                    if parabolic_columns {
                        let (eta, xi) = eta_xi(rho, z);
                        rec.push(fmt17(eta));
                        rec.push(fmt17(xi));
                    }
                    wr.write_record(&rec).map_err(io)?;
                }
            }
        }
        wr.flush().map_err(|e| GridError::Io(e.to_string()))
    }

    /// Metadata written next to the CSV.
    pub fn sidecar(&self, csv_name: &str, parabolic_columns: bool) -> serde_json::Value {
        let mut columns = vec!["rho", "phi", "z", "re_psi", "im_psi"];
        if parabolic_columns {
            columns.extend(["eta", "xi"]);
        }
        serde_json::json!({
            "mode": self.mode,
            "grid": self.spec,
            "steps": [self.spec.h_rho(), self.spec.h_phi(), self.spec.h_z()],
            "columns": columns,
            "data": csv_name,
            "layout": "rho-major, then phi, then z",
        })
    }

    /// Write `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write_files(&self, dir: &Path, stem: &str, parabolic_columns: bool) -> GridResult<(PathBuf, PathBuf)> {
        let io = |e: std::io::Error| GridError::Io(e.to_string());
        std::fs::create_dir_all(dir).map_err(io)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        let f = std::io::BufWriter::new(std::fs::File::create(&csv_path).map_err(io)?);
        self.write_csv(f, parabolic_columns)?;
        let meta = self.sidecar(&format!("{stem}.csv"), parabolic_columns);
        let text = serde_json::to_string_pretty(&meta).map_err(|e| GridError::Io(e.to_string()))?;
        std::fs::write(&json_path, text + "\n").map_err(io)?;
        Ok((csv_path, json_path))
    }
}

/// `(η, ξ) = (r + z, r - z)`, with the smaller one formed as `ρ²/(r + |z|)`
/// so it keeps full relative precision near the axis.
pub fn eta_xi(rho: f64, z: f64) -> (f64, f64) {
    let r = rho.hypot(z);
    let big = r + z.abs();
    let small = if big > 0.0 { rho * rho / big } else { 0.0 };
    if z >= 0.0 {
        (big, small)
    } else {
        (small, big)
    }
}

pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
