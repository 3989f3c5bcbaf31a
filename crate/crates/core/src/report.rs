//! Deterministic text rendering of every analysis result as Markdown or CSV
//! tables, laid out like the published tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cointegration::JohansenReport;
use crate::error::{Error, Result};
use crate::stats::{RegressionReport, WindowCorrelation};
use crate::unitroot::{PBound, TrendSpec, UnitRootReport, UnitRootTest};
use crate::vargranger::{ScaleGrangerTable, SIGNIF_LEGEND};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Markdown => "md",
            Format::Csv => "csv",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Correlation,
    Anova,
    UnitRoot,
    Johansen,
    Granger,
    Periodogram,
    Coherence,
}

impl Section {
    pub const ALL: [Section; 7] = [
        Section::Correlation,
        Section::Anova,
        Section::UnitRoot,
        Section::Johansen,
        Section::Granger,
        Section::Periodogram,
        Section::Coherence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Section::Correlation => "correlation",
            Section::Anova => "anova",
            Section::UnitRoot => "unitroot",
            Section::Johansen => "johansen",
            Section::Granger => "granger",
            Section::Periodogram => "periodogram",
            Section::Coherence => "coherence",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaSection {
    pub dependent: String,
    pub regressors: Vec<String>,
    pub report: RegressionReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitRootEntry {
    pub series: String,
    pub differenced: bool,
    pub report: UnitRootReport,
}

impl UnitRootEntry {
    pub fn label(&self) -> String {
        if self.differenced {
            format!("Δ{}", self.series)
        } else {
            self.series.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrangerSection {
    pub lag_order: usize,
    pub tables: Vec<ScaleGrangerTable>,
}

/// Every result a report can contain. Paths are stored as given (relative to
/// the output directory) so rendered bytes never depend on where a run lives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportBundle {
    pub correlation: Option<Vec<WindowCorrelation>>,
    pub anova: Option<AnovaSection>,
    pub unit_root: Option<Vec<UnitRootEntry>>,
    pub johansen: Option<JohansenReport>,
    pub granger: Option<GrangerSection>,
    pub periodogram: Option<Vec<String>>,
    pub coherence: Option<Vec<String>>,
}

impl ReportBundle {
    pub fn has(&self, section: Section) -> bool {
        match section {
            Section::Correlation => self.correlation.is_some(),
            Section::Anova => self.anova.is_some(),
            Section::UnitRoot => self.unit_root.is_some(),
            Section::Johansen => self.johansen.is_some(),
            Section::Granger => self.granger.is_some(),
            Section::Periodogram => self.periodogram.is_some(),
            Section::Coherence => self.coherence.is_some(),
        }
    }

    pub fn present(&self) -> Vec<Section> {
        Section::ALL.into_iter().filter(|s| self.has(*s)).collect()
    }
}

/// Six significant digits, ties to even, no locale. Magnitudes in [1e-4, 1e6)
/// print in positional notation, others in scientific notation; trailing
/// zeros are dropped.
pub fn fmt_sig6(v: f64) -> String {
    if v.is_nan() {
        return "NA".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    // std formatting rounds the exact binary value with ties to even
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    if !(-4..6).contains(&exp) {
        let mut m = format!("{}.{}", &digits[..1], &digits[1..]);
        trim_zeros(&mut m);
        return format!("{sign}{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let mut out = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let point = exp as usize + 1;
        format!("{}.{}", &digits[..point], &digits[point..])
    };
    trim_zeros(&mut out);
    format!("{sign}{out}")
}

fn trim_zeros(s: &mut String) {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
}

fn fmt_p(p: f64, bound: PBound) -> String {
    match bound {
        PBound::Exact => fmt_sig6(p),
        PBound::AtLeast => format!("> {}", fmt_sig6(p)),
        PBound::AtMost => format!("< {}", fmt_sig6(p)),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(cells: &[String]) -> String {
    let mut line = cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

fn md_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    let mut out = csv_row(&header);
    rows.iter().for_each(|r| out.push_str(&csv_row(r)));
    out
}

fn table(format: Format, header: &[&str], rows: &[Vec<String>]) -> String {
    match format {
        Format::Markdown => md_table(header, rows),
        Format::Csv => csv_table(header, rows),
    }
}

/// One rendered file: name relative to the output directory plus contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedFile {
    pub name: String,
    pub contents: String,
}

fn file(name: &str, format: Format, contents: String) -> RenderedFile {
    RenderedFile {
        name: format!("{name}.{}", format.extension()),
        contents,
    }
}

/// Renders the requested sections, in the fixed section order, without
/// touching the filesystem. Fails listing every requested section the bundle
/// lacks.
pub fn render(bundle: &ReportBundle, format: Format, sections: &[Section]) -> Result<Vec<RenderedFile>> {
    let mut wanted = sections.to_vec();
    wanted.sort();
    wanted.dedup();
    let missing: Vec<String> = wanted
        .iter()
        .filter(|s| !bundle.has(**s))
        .map(|s| s.name().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Incomplete(missing));
    }
    let mut files = Vec::new();
    for section in wanted {
        match section {
            Section::Correlation => files.push(correlation(bundle.correlation.as_ref().unwrap(), format)),
            Section::Anova => files.extend(anova(bundle.anova.as_ref().unwrap(), format)),
            Section::UnitRoot => files.extend(unit_root(bundle.unit_root.as_ref().unwrap(), format)),
            Section::Johansen => files.extend(johansen(bundle.johansen.as_ref().unwrap(), format)),
            Section::Granger => files.push(granger(bundle.granger.as_ref().unwrap(), format)),
            Section::Periodogram => {
                files.push(artifacts("periodogram", bundle.periodogram.as_ref().unwrap(), format))
            }
            Section::Coherence => {
                files.push(artifacts("coherence", bundle.coherence.as_ref().unwrap(), format))
            }
        }
    }
    Ok(files)
}

/// `render`, then writes each file into `out_dir`. Returns the written paths.
pub fn render_tables(
    bundle: &ReportBundle,
    format: Format,
    sections: &[Section],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let files = render(bundle, format, sections)?;
    if !files.is_empty() {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    }
    files
        .into_iter()
        .map(|f| {
            let path = out_dir.join(&f.name);
            std::fs::write(&path, f.contents).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

fn correlation(windows: &[WindowCorrelation], format: Format) -> RenderedFile {
    let pairs: Vec<String> = windows
        .first()
        .map(|w| w.pairs.iter().map(|p| format!("r({},{})", p.first, p.second)).collect())
        .unwrap_or_default();
    let mut header = vec!["Period"];
    header.extend(pairs.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = windows
        .iter()
        .map(|w| {
            let mut row = vec![format!("{}-{} weeks", w.start, w.end)];
            row.extend(w.pairs.iter().map(|p| p.r.map_or("NA".into(), fmt_sig6)));
            row
        })
        .collect();
    file("correlation", format, table(format, &header, &rows))
}

fn anova(section: &AnovaSection, format: Format) -> Vec<RenderedFile> {
    let r = &section.report;
    let mut terms = vec!["(Intercept)".to_string()];
    terms.extend(section.regressors.iter().cloned());
    let estimates: Vec<f64> = std::iter::once(r.intercept).chain(r.slopes.iter().copied()).collect();
    let coef_rows: Vec<Vec<String>> = terms
        .iter()
        .enumerate()
        .map(|(i, term)| {
            vec![
                term.clone(),
                fmt_sig6(estimates[i]),
                fmt_sig6(r.std_errors[i]),
                fmt_sig6(r.t_values[i]),
                fmt_sig6(r.t_p_values[i]),
            ]
        })
        .collect();
    let coef_header = ["Term", "Estimate", "Std. Error", "t value", "Pr(>|t|)"];
    let summary_rows: Vec<Vec<String>> = [
        ("Observations", r.nobs.to_string()),
        ("Residual df", r.df_resid.to_string()),
        ("Model df", r.df_model.to_string()),
        ("R-squared", fmt_sig6(r.r_squared)),
        ("Adj. R-squared", fmt_sig6(r.adj_r_squared)),
        ("F-statistic", fmt_sig6(r.f_statistic)),
        ("Prob (F-statistic)", fmt_sig6(r.f_p_value)),
        ("Durbin-Watson", r.durbin_watson.map_or("NA".into(), fmt_sig6)),
    ]
    .into_iter()
    .map(|(k, v)| vec![k.to_string(), v])
    .collect();
    match format {
        Format::Markdown => {
            let mut out = format!("Dependent variable: {}\n\n", section.dependent);
            out.push_str(&md_table(&coef_header, &coef_rows));
            out.push('\n');
            out.push_str(&md_table(&["Statistic", "Value"], &summary_rows));
            vec![file("anova", format, out)]
        }
        Format::Csv => {
            let mut summary = summary_rows.clone();
            summary.insert(0, vec!["Dependent variable".into(), section.dependent.clone()]);
            vec![
                file("anova", format, csv_table(&coef_header, &coef_rows)),
                file("anova_summary", format, csv_table(&["statistic", "value"], &summary)),
            ]
        }
    }
}

/// Level rows before differenced rows, series in order of first appearance.
fn ordered_entries(entries: &[UnitRootEntry]) -> Vec<&UnitRootEntry> {
    let mut series: Vec<&str> = Vec::new();
    for e in entries {
        if !series.contains(&e.series.as_str()) {
            series.push(&e.series);
        }
    }
    let mut sorted: Vec<&UnitRootEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| (series.iter().position(|s| *s == e.series), e.differenced));
    sorted
}

fn unit_root(entries: &[UnitRootEntry], format: Format) -> Vec<RenderedFile> {
    let ordered = ordered_entries(entries);
    let tests = [UnitRootTest::Adf, UnitRootTest::PhillipsPerron, UnitRootTest::Kpss];
    let mut files = Vec::new();
    for trend in TrendSpec::ALL {
        let in_trend: Vec<&&UnitRootEntry> = ordered.iter().filter(|e| e.report.trend == trend).collect();
        if in_trend.is_empty() {
            continue;
        }
        let mut out = String::new();
        let mut csv_rows = Vec::new();
        if format == Format::Markdown {
            let _ = writeln!(out, "Trend: {}\n", trend.label());
        }
        for test in tests {
            let rows: Vec<&&&UnitRootEntry> = in_trend.iter().filter(|e| e.report.test == test).collect();
            if rows.is_empty() {
                continue;
            }
            let cvs = rows[0].report.critical_values;
            match format {
                Format::Markdown => {
                    let body: Vec<Vec<String>> = rows
                        .iter()
                        .map(|e| {
                            vec![
                                e.label(),
                                fmt_sig6(e.report.statistic),
                                fmt_p(e.report.p_value, e.report.p_bound),
                                e.report.lags.to_string(),
                            ]
                        })
                        .collect();
                    let _ = writeln!(out, "{} test\n", test.label());
                    out.push_str(&md_table(&["Time Series", "Statistic", "p.value", "lags"], &body));
                    out.push('\n');
                    let cv_rows: Vec<Vec<String>> =
                        cvs.iter().map(|(l, v)| vec![l.to_string(), fmt_sig6(*v)]).collect();
                    out.push_str(&md_table(&["Level of Significance", "Critical Value"], &cv_rows));
                    out.push('\n');
                }
                Format::Csv => {
                    for e in rows {
                        let rejects: Vec<String> = e.report.reject_at.iter().map(|l| l.to_string()).collect();
                        csv_rows.push(vec![
                            test.label().to_string(),
                            e.label(),
                            fmt_sig6(e.report.statistic),
                            fmt_p(e.report.p_value, e.report.p_bound),
                            e.report.lags.to_string(),
                            e.report.nobs.to_string(),
                            fmt_sig6(cvs[0].1),
                            fmt_sig6(cvs[1].1),
                            fmt_sig6(cvs[2].1),
                            rejects.join(" "),
                        ]);
                    }
                }
            }
        }
        if format == Format::Csv {
            out = csv_table(
                &["test", "series", "statistic", "p_value", "lags", "nobs", "cv_10", "cv_5", "cv_1", "reject_at"],
                &csv_rows,
            );
        }
        files.push(file(&format!("unitroot_{}", trend.slug()), format, out));
    }
    files
}

fn hypothesis_label(k: usize) -> String {
    if k == 0 {
        "r = 0".into()
    } else {
        format!("r <= {k}")
    }
}

fn johansen(report: &JohansenReport, format: Format) -> Vec<RenderedFile> {
    // highest rank first, as in the urca printout
    let hyp_rows: Vec<Vec<String>> = (0..report.trace_stats.len())
        .rev()
        .map(|k| {
            let cv = report.critical_values[k];
            vec![
                hypothesis_label(k),
                fmt_sig6(report.trace_stats[k]),
                fmt_sig6(cv[0].1),
                fmt_sig6(cv[1].1),
                fmt_sig6(cv[2].1),
            ]
        })
        .collect();
    let hyp_header = ["Hypothesis", "test statistic", "10 pct", "5 pct", "1 pct"];
    let mut vec_header = vec!["Variable".to_string()];
    vec_header.extend(report.names.iter().map(|n| format!("{n}.l{}", report.lag_order)));
    let vec_rows: Vec<Vec<String>> = report
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut row = vec![format!("{name}.l{}", report.lag_order)];
            row.extend(report.eigenvectors.iter().map(|v| fmt_sig6(v[i])));
            row
        })
        .collect();
    let vec_header: Vec<&str> = vec_header.iter().map(String::as_str).collect();
    match format {
        Format::Markdown => {
            let mut out = String::from("Test type: trace statistic, unrestricted constant\n\n");
            let _ = writeln!(out, "Lag order (levels): {}, observations: {}\n", report.lag_order, report.nobs);
            let eig: Vec<String> = report.eigenvalues.iter().map(|v| fmt_sig6(*v)).collect();
            let _ = writeln!(out, "Eigenvalues (lambda): {}\n", eig.join(", "));
            out.push_str(&md_table(&hyp_header, &hyp_rows));
            out.push_str("\nEigenvectors, normalised to first column:\n\n");
            out.push_str(&md_table(&vec_header, &vec_rows));
            vec![file("johansen", format, out)]
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = (0..report.trace_stats.len())
                .rev()
                .zip(&hyp_rows)
                .map(|(k, row)| {
                    let mut row = row.clone();
                    row.insert(2, fmt_sig6(report.eigenvalues[k]));
                    row
                })
                .collect();
            vec![
                file(
                    "johansen",
                    format,
                    csv_table(&["hypothesis", "trace_statistic", "eigenvalue", "cv_10", "cv_5", "cv_1"], &rows),
                ),
                file("johansen_eigenvectors", format, csv_table(&vec_header, &vec_rows)),
            ]
        }
    }
}

fn granger(section: &GrangerSection, format: Format) -> RenderedFile {
    match format {
        Format::Markdown => {
            let mut out = format!("{SIGNIF_LEGEND}\n\nLag order: {}\n", section.lag_order);
            for t in &section.tables {
                let _ = writeln!(out, "\nScale {} ({})\n", t.scale, t.band_label());
                let rows: Vec<Vec<String>> = t
                    .reports
                    .iter()
                    .map(|r| {
                        let p = format!("{} {}", fmt_sig6(r.p_value), r.signif());
                        vec![r.dependent.clone(), r.independent.clone(), fmt_sig6(r.f_statistic), p.trim_end().to_string()]
                    })
                    .collect();
                out.push_str(&md_table(&["Dependent Variable", "Independent variable", "F-stat", "Prob."], &rows));
            }
            file("granger", format, out)
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = section
                .tables
                .iter()
                .flat_map(|t| {
                    t.reports.iter().map(move |r| {
                        vec![
                            t.scale.to_string(),
                            t.band_label(),
                            r.dependent.clone(),
                            r.independent.clone(),
                            r.lag_order.to_string(),
                            fmt_sig6(r.f_statistic),
                            fmt_sig6(r.p_value),
                            r.signif().trim().to_string(),
                        ]
                    })
                })
                .collect();
            file(
                "granger",
                format,
                csv_table(
                    &["scale", "band", "dependent", "independent", "lag_order", "f_statistic", "p_value", "signif"],
                    &rows,
                ),
            )
        }
    }
}

fn artifacts(name: &str, paths: &[String], format: Format) -> RenderedFile {
    let rows: Vec<Vec<String>> = paths.iter().map(|p| vec![p.clone()]).collect();
    file(name, format, table(format, &["artifact"], &rows))
}
