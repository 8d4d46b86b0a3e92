//! Run configuration from command-line flags and an optional INI file.
//!
//! INI layout: `[system]` holds `gallery`, `orbit`, `assume_no_bounded_solutions` and the
//! gallery parameters; `[window]` holds `lo`, `hi`, `h`, `margin`; `[tolerances]` holds `tol`,
//! `quad_tol`, `jet_tol`. Flags override file values.

use std::path::{Path, PathBuf};

use shadowkit::system::Params;

use crate::CliError;

#[derive(Debug, Clone)]
pub struct Tolerances {
    pub tol: f64,
    pub quad_tol: f64,
    /// `None` picks 1e−9 for sequences and 1e−7 for functions of time.
    pub jet_tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gallery: String,
    pub params: Params,
    pub orbit: Option<PathBuf>,
    pub tol: Tolerances,
    pub max_iter: usize,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    pub assume_no_bounded_solutions: bool,
    pub parallel: bool,
}

/// Flag values before merging with a config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub gallery: Option<String>,
    pub params: Vec<String>,
    pub config: Option<PathBuf>,
    pub orbit: Option<PathBuf>,
    pub tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub jet_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    pub assume_no_bounded_solutions: bool,
    pub parallel: bool,
}

fn number(key: &str, s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::config(format!("`{key}`: cannot parse `{}` as a number", s.trim())))
}

fn flag(key: &str, s: &str) -> Result<bool, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(CliError::config(format!(
            "`{key}`: expected true/false, got `{other}`"
        ))),
    }
}

/// Parses `k=v[,k=v...]` into `params`.
pub fn parse_params(list: &str, params: &mut Params) -> Result<(), CliError> {
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            CliError::config(format!("parameter `{item}` is not of the form key=value"))
        })?;
        params.insert(k.trim().to_string(), number(k.trim(), v)?);
    }
    Ok(())
}

#[derive(Default)]
struct FileValues {
    gallery: Option<String>,
    orbit: Option<PathBuf>,
    params: Params,
    tol: Option<f64>,
    quad_tol: Option<f64>,
    jet_tol: Option<f64>,
    assume: bool,
}

fn read_file(path: &Path) -> Result<FileValues, CliError> {
    let ini = ini::Ini::load_from_file(path)
        .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = FileValues::default();
    for (section, props) in ini.iter() {
        for (k, v) in props.iter() {
            match (section, k) {
                (Some("system"), "gallery") => out.gallery = Some(v.trim().to_string()),
                (Some("system"), "orbit") => out.orbit = Some(base.join(v.trim())),
                (Some("system"), "assume_no_bounded_solutions") => out.assume = flag(k, v)?,
                (Some("system"), _) => {
                    out.params.insert(k.to_string(), number(k, v)?);
                }
                (Some("window"), "lo" | "hi" | "h" | "margin") => {
                    out.params.insert(k.to_string(), number(k, v)?);
                }
                (Some("tolerances"), "tol") => out.tol = Some(number(k, v)?),
                (Some("tolerances"), "quad_tol") => out.quad_tol = Some(number(k, v)?),
                (Some("tolerances"), "jet_tol") => out.jet_tol = Some(number(k, v)?),
                (s, _) => {
                    return Err(CliError::config(format!(
                        "config {}: unexpected key `{k}` in section [{}]",
                        path.display(),
                        s.unwrap_or("")
                    )))
                }
            }
        }
    }
    Ok(out)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{name} must be > 0, got {v}")))
    }
}

impl RunConfig {
    pub fn build(o: Overrides) -> Result<Self, CliError> {
        let file = match &o.config {
            Some(p) => read_file(p)?,
            None => FileValues::default(),
        };
        let gallery = o.gallery.or(file.gallery).ok_or_else(|| {
            CliError::config(
                "no system given; use --gallery NAME or a config file with [system] gallery",
            )
        })?;
        let mut params = file.params;
        for p in &o.params {
            parse_params(p, &mut params)?;
        }
        let tol = Tolerances {
            tol: positive("tol", o.tol.or(file.tol).unwrap_or(1e-12))?,
            quad_tol: positive("quad_tol", o.quad_tol.or(file.quad_tol).unwrap_or(1e-12))?,
            jet_tol: o
                .jet_tol
                .or(file.jet_tol)
                .map(|v| positive("jet_tol", v))
                .transpose()?,
        };
        let max_iter = o.max_iter.unwrap_or(500);
        if max_iter == 0 {
            return Err(CliError::config("max-iter must be > 0"));
        }
        Ok(Self {
            gallery,
            params,
            orbit: o.orbit.or(file.orbit),
            tol,
            max_iter,
            out_json: o.out_json,
            out_csv: o.out_csv,
            assume_no_bounded_solutions: o.assume_no_bounded_solutions || file.assume,
            parallel: o.parallel,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_from_list() {
        let mut p = Params::new();
        parse_params("lambda=0.5, eps=1e-1", &mut p).unwrap();
        parse_params("a=3", &mut p).unwrap();
        assert_eq!(p["lambda"], 0.5);
        assert_eq!(p["eps"], 0.1);
        assert_eq!(p["a"], 3.0);
        assert!(parse_params("lambda", &mut p).is_err());
        assert!(parse_params("lambda=x", &mut p).is_err());
    }

    #[test]
    fn file_and_flags_merge() {
        let dir = std::env::temp_dir().join(format!("shadowkit-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.ini");
        std::fs::write(
            &path,
            "[system]\ngallery = cont-sin\nlambda = 0.3\n[window]\nlo = -10\n[tolerances]\ntol = 1e-10\n",
        )
        .unwrap();
        let o = Overrides {
            config: Some(path.clone()),
            params: vec!["lambda=0.7".into()],
            ..Default::default()
        };
        let c = RunConfig::build(o).unwrap();
        assert_eq!(c.gallery, "cont-sin");
        assert_eq!(c.params["lambda"], 0.7);
        assert_eq!(c.params["lo"], -10.0);
        assert_eq!(c.tol.tol, 1e-10);
        std::fs::write(&path, "[window]\nwidth = 3\n").unwrap();
        let o = Overrides {
            config: Some(path),
            gallery: Some("disc-toy".into()),
            ..Default::default()
        };
        assert!(RunConfig::build(o).is_err());
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn tolerances_must_be_positive() {
        let o = Overrides {
            gallery: Some("disc-toy".into()),
            tol: Some(0.0),
            ..Default::default()
        };
        assert!(RunConfig::build(o).is_err());
    }
}
