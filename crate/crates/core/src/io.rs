//! LPRF1 field files.
//!
//! ```text
//! LPRF1
//! dims = 32 32 32 4 8
//! dtype = f64le
//! kind = profile
//! half_width = 8.0
//! ...
//! end
//! <raw little-endian f64 values>
//! ```
//!
//! `dims` lists extents fastest first, so the first three of a grid field are
//! `x`, `y`, `z`. Metadata floats are written in shortest round-trip form,
//! which makes reloading bit exact.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::symmetry::{DomainShape, FundamentalDomainData};
use crate::transform::{Boundary, ProfileTrajectory};

pub const MAGIC: &str = "LPRF1";
const DTYPE: &str = "f64le";

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub dims: Vec<usize>,
    pub meta: BTreeMap<String, String>,
    pub data: Vec<f64>,
}

impl FieldFile {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Self {
            dims,
            meta: BTreeMap::new(),
            data,
        }
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Debug) -> Self {
        self.meta.insert(key.to_string(), format!("{value:?}").trim_matches('"').to_string());
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = format!("{MAGIC}\ndims = ");
        header += &self.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
        header += &format!("\ndtype = {DTYPE}\n");
        for (k, v) in &self.meta {
            header += &format!("{k} = {v}\n");
        }
        header += "end\n";
        let mut bytes = header.into_bytes();
        bytes.reserve(8 * self.data.len());
        for x in &self.data {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        bytes
    }

    /// Parses a file image; `name` is used in error messages.
    pub fn from_bytes(bytes: &[u8], name: &str) -> Result<Self> {
        let bad = |message: String| Error::Integrity {
            file: name.to_string(),
            message,
        };
        let mut pos = 0;
        let mut next_line = || -> Result<String> {
            let rest = &bytes[pos..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| bad("header is not terminated".into()))?;
            pos += end + 1;
            String::from_utf8(rest[..end].to_vec()).map_err(|_| bad("header is not valid text".into()))
        };
        if next_line()? != MAGIC {
            return Err(bad(format!("missing `{MAGIC}` magic")));
        }
        let mut dims = None;
        let mut meta = BTreeMap::new();
        loop {
            let line = next_line()?;
            if line == "end" {
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed header line `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "dims" => {
                    let d: Option<Vec<usize>> = v.split_whitespace().map(|x| x.parse().ok()).collect();
                    dims = Some(d.ok_or_else(|| bad(format!("malformed dims `{v}`")))?);
                }
                "dtype" if v != DTYPE => return Err(bad(format!("unsupported dtype `{v}`"))),
                "dtype" => {}
                _ => {
                    meta.insert(k.to_string(), v.to_string());
                }
            }
        }
        let dims = dims.ok_or_else(|| bad("missing dims".into()))?;
        let count: usize = dims.iter().product();
        let payload = &bytes[pos..];
        if payload.len() != 8 * count {
            return Err(bad(format!("expected {} data bytes, found {}", 8 * count, payload.len())));
        }
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(Self { dims, meta, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let name = path.display().to_string();
        let bytes = fs::read(path).map_err(|e| Error::Integrity {
            file: name.clone(),
            message: e.to_string(),
        })?;
        Self::from_bytes(&bytes, &name)
    }

    /// Metadata value parsed as `T`.
    pub fn get<T: std::str::FromStr>(&self, key: &str, name: &str) -> Result<T> {
        let raw = self.meta.get(key).ok_or_else(|| Error::Integrity {
            file: name.to_string(),
            message: format!("missing metadata `{key}`"),
        })?;
        raw.parse().map_err(|_| Error::Integrity {
            file: name.to_string(),
            message: format!("metadata `{key}` has unparseable value `{raw}`"),
        })
    }

    fn expect_kind(&self, kind: &str, name: &str) -> Result<()> {
        let found: String = self.get("kind", name)?;
        if found != kind {
            return Err(Error::Integrity {
                file: name.to_string(),
                message: format!("expected a `{kind}` file, found `{found}`"),
            });
        }
        Ok(())
    }

    fn expect_dims(&self, dims: &[usize], name: &str) -> Result<()> {
        if self.dims != dims {
            return Err(Error::Integrity {
                file: name.to_string(),
                message: format!("dims {:?} do not match {:?}", self.dims, dims),
            });
        }
        Ok(())
    }
}

fn grid_from(file: &FieldFile, name: &str) -> Result<Grid> {
    let n: usize = file.get("n", name)?;
    let half_width: f64 = file.get("half_width", name)?;
    Grid::new(n, half_width).map_err(|e| Error::Integrity {
        file: name.to_string(),
        message: e.to_string(),
    })
}

pub fn vector_to_file(f: &VectorField) -> FieldFile {
    let n = f.grid.n();
    let data = f.comps.iter().flatten().copied().collect();
    FieldFile::new(vec![n, n, n, 3], data)
        .with("kind", "vector")
        .with("n", n)
        .with("half_width", f.grid.half_width())
}

pub fn vector_from_file(file: &FieldFile, name: &str) -> Result<VectorField> {
    file.expect_kind("vector", name)?;
    let grid = grid_from(file, name)?;
    let n = grid.n();
    file.expect_dims(&[n, n, n, 3], name)?;
    let len = grid.len();
    let mut f = VectorField::zeros(grid);
    for c in 0..3 {
        f.comps[c].copy_from_slice(&file.data[c * len..(c + 1) * len]);
    }
    Ok(f)
}

/// Velocity and pressure at every `s` node: dims `[n, n, n, 4, n_s]`.
pub fn profile_to_file(traj: &ProfileTrajectory) -> FieldFile {
    let n = traj.grid.n();
    let mut data = Vec::with_capacity(4 * traj.grid.len() * traj.n_s());
    for (v, p) in traj.velocity.iter().zip(&traj.pressure) {
        for c in &v.comps {
            data.extend_from_slice(c);
        }
        data.extend_from_slice(&p.data);
    }
    FieldFile::new(vec![n, n, n, 4, traj.n_s()], data)
        .with("kind", "profile")
        .with("n", n)
        .with("half_width", traj.grid.half_width())
        .with("period", traj.period)
        .with("alpha", traj.alpha)
        .with(
            "boundary",
            match traj.boundary {
                Boundary::Open => "open",
                Boundary::Periodic => "periodic",
            },
        )
}

pub fn profile_from_file(file: &FieldFile, name: &str) -> Result<ProfileTrajectory> {
    file.expect_kind("profile", name)?;
    let grid = grid_from(file, name)?;
    let n = grid.n();
    let n_s = *file.dims.last().unwrap_or(&0);
    file.expect_dims(&[n, n, n, 4, n_s], name)?;
    let boundary = match file.get::<String>("boundary", name)?.as_str() {
        "open" => Boundary::Open,
        "periodic" => Boundary::Periodic,
        other => {
            return Err(Error::Integrity {
                file: name.to_string(),
                message: format!("unknown boundary `{other}`"),
            })
        }
    };
    let len = grid.len();
    let mut velocity = Vec::with_capacity(n_s);
    let mut pressure = Vec::with_capacity(n_s);
    for chunk in file.data.chunks_exact(4 * len) {
        let mut v = VectorField::zeros(grid);
        for c in 0..3 {
            v.comps[c].copy_from_slice(&chunk[c * len..(c + 1) * len]);
        }
        velocity.push(v);
        pressure.push(ScalarField {
            grid,
            data: chunk[3 * len..].to_vec(),
        });
    }
    Ok(ProfileTrajectory {
        grid,
        period: file.get("period", name)?,
        alpha: file.get("alpha", name)?,
        velocity,
        pressure,
        boundary,
    })
}

/// Coefficient rows `b(s_n)`: dims `[k, rows]`.
pub fn coefficients_to_file(rows: &[Vec<f64>]) -> FieldFile {
    let k = rows.first().map_or(0, Vec::len);
    FieldFile::new(vec![k, rows.len()], rows.iter().flatten().copied().collect()).with("kind", "coefficients")
}

pub fn coefficients_from_file(file: &FieldFile, name: &str) -> Result<Vec<Vec<f64>>> {
    file.expect_kind("coefficients", name)?;
    if file.dims.len() != 2 || file.dims[0] == 0 {
        return Err(Error::Integrity {
            file: name.to_string(),
            message: format!("coefficient dims {:?} are not `[k, rows]`", file.dims),
        });
    }
    Ok(file.data.chunks_exact(file.dims[0]).map(<[f64]>::to_vec).collect())
}

/// Fundamental-domain samples: dims `[n_phi, n_theta, n_r, 3]`.
pub fn domain_to_file(d: &FundamentalDomainData) -> FieldFile {
    let data: Vec<f64> = (0..3).flat_map(|c| d.values.iter().map(move |v| v[c])).collect();
    let file = FieldFile::new(vec![d.n_phi, d.n_theta, d.n_radial(), 3], data).with("kind", "domain");
    match d.shape {
        DomainShape::Sphere => file.with("shape", "sphere"),
        DomainShape::Annulus { lambda, .. } => file.with("shape", "annulus").with("lambda", lambda),
    }
}

pub fn domain_from_file(file: &FieldFile, name: &str) -> Result<FundamentalDomainData> {
    file.expect_kind("domain", name)?;
    if file.dims.len() != 4 || file.dims[3] != 3 {
        return Err(Error::Integrity {
            file: name.to_string(),
            message: format!("domain dims {:?} are not `[n_phi, n_theta, n_r, 3]`", file.dims),
        });
    }
    let (n_phi, n_theta, n_r) = (file.dims[0], file.dims[1], file.dims[2]);
    let shape = match file.get::<String>("shape", name)?.as_str() {
        "sphere" if n_r == 1 => DomainShape::Sphere,
        "annulus" => DomainShape::Annulus {
            n_r,
            lambda: file.get("lambda", name)?,
        },
        other => {
            return Err(Error::Integrity {
                file: name.to_string(),
                message: format!("unsupported shape `{other}` with {n_r} radii"),
            })
        }
    };
    let count = n_phi * n_theta * n_r;
    let values = (0..count)
        .map(|i| [file.data[i], file.data[count + i], file.data[2 * count + i]])
        .collect();
    Ok(FundamentalDomainData {
        shape,
        n_theta,
        n_phi,
        values,
    })
}
