//! Emits a standalone matplotlib script for CSVs written by the scenarios.
//!
//! The script reads the CSVs itself with the `csv` module, so the same
//! inputs always give the same text.

use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Backflow current and density against log time.
    Fig1,
    /// One panel per file: density solid, current dashed.
    Fig2,
    /// Window half-width against target probability.
    Table,
    /// Plain TOA density.
    Toa,
}

impl Figure {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "table" => Ok(Figure::Table),
            "toa" => Ok(Figure::Toa),
            other => Err(CliError::Usage(format!("unknown figure {other:?}; expected fig1, fig2, table or toa"))),
        }
    }

    pub fn required_columns(self) -> &'static [&'static str] {
        match self {
            Figure::Fig1 => &["t_prime", "current", "normalized_density"],
            Figure::Fig2 => &["t", "density", "normalized_density", "current"],
            Figure::Table => &["target_P", "epsilon_s"],
            Figure::Toa => &["t", "density"],
        }
    }

    fn infer(header: &[String]) -> Figure {
        let has = |c: &str| header.iter().any(|h| h == c);
        if has("t_prime") {
            Figure::Fig1
        } else if has("target_P") {
            Figure::Table
        } else if has("current") {
            Figure::Fig2
        } else {
            Figure::Toa
        }
    }
}

fn read_header(path: &Path) -> Result<Vec<String>, CliError> {
    if !path.is_file() {
        return Err(CliError::Io(format!("{}: no such file", path.display())));
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let header = r
        .headers()
        .map_err(|e| CliError::Schema(format!("{}: unreadable header: {e}", path.display())))?;
    Ok(header.iter().map(str::to_string).collect())
}

fn py_str(s: &str) -> String {
    let mut out = String::from("'");
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// Checks every file against the figure's columns and returns the script.
/// Without `figure`, the kind is inferred from the first file's header.
pub fn emit_plot_script(files: &[PathBuf], figure: Option<Figure>) -> Result<String, CliError> {
    if files.is_empty() {
        return Err(CliError::Usage("plot needs at least one CSV file".into()));
    }
    let mut figure = figure;
    for f in files {
        let header = read_header(f)?;
        let fig = *figure.get_or_insert_with(|| Figure::infer(&header));
        for col in fig.required_columns() {
            if !header.iter().any(|h| h == col) {
                return Err(CliError::Schema(format!("{}: missing column {col:?}", f.display())));
            }
        }
    }
    let figure = figure.expect("set above");
    let list = files
        .iter()
        .map(|f| py_str(&f.display().to_string()))
        .collect::<Vec<_>>()
        .join(", ");

    let mut s = String::new();
    s.push_str("import csv\n\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!("FILES = [{list}]\n\n"));
    s.push_str(
        "def load(path):\n    with open(path, newline='') as fh:\n        rows = list(csv.DictReader(fh))\n    \
         return {k: [float(r[k]) if r[k] else float('nan') for r in rows] for k in rows[0]}\n\n",
    );
    match figure {
        Figure::Fig1 => s.push_str(
            "d = load(FILES[0])\n\
             fig, ax = plt.subplots(figsize=(6, 4))\n\
             ax.plot(d['t_prime'], d['current'], '--', label='current')\n\
             ax.plot(d['t_prime'], d['normalized_density'], '-', label='density')\n\
             ax.axhline(0.0, color='k', lw=0.5)\n\
             ax.set_xscale('log')\n\
             ax.set_xlabel(\"t'\")\n\
             ax.legend()\n",
        ),
        Figure::Fig2 => s.push_str(
            "fig, axes = plt.subplots(1, len(FILES), figsize=(5 * len(FILES), 4), squeeze=False)\n\
             for ax, path in zip(axes[0], FILES):\n    \
                 d = load(path)\n    \
                 ax.plot(d['t'], d['normalized_density'], '-', label='density')\n    \
                 ax.plot(d['t'], d['current'], '--', label='current')\n    \
                 ax.axhline(0.0, color='k', lw=0.5)\n    \
                 ax.set_xlabel('t')\n    \
                 ax.legend()\n",
        ),
        Figure::Table => s.push_str(
            "fig, ax = plt.subplots(figsize=(6, 4))\n\
             for path in FILES:\n    \
                 d = load(path)\n    \
                 ax.loglog(d['target_P'], d['epsilon_s'], 'o-', label=path)\n\
             ax.set_xlabel('P')\n\
             ax.set_ylabel('epsilon [s]')\n\
             ax.legend()\n",
        ),
        Figure::Toa => s.push_str(
            "fig, ax = plt.subplots(figsize=(6, 4))\n\
             for path in FILES:\n    \
                 d = load(path)\n    \
                 y = d.get('normalized_density')\n    \
                 if y is None or all(v != v for v in y):\n        \
                     y = d['density']\n    \
                 ax.plot(d['t'], y, '-', label=path)\n\
             ax.set_xlabel('t')\n\
             ax.legend()\n",
        ),
    }
    s.push_str("fig.tight_layout()\nfig.savefig(FILES[0].rsplit('.', 1)[0] + '.png', dpi=150)\n");
    Ok(s)
}
