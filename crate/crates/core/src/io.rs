//! Text format for relations.
//!
//! ```text
//! #rowdomain Genre
//! #coldomain Movie
//! Romance<TAB>m1
//! Drama<TAB>m3
//! ```
//!
//! One `row<TAB>col` edge per line. Optional headers:
//!
//! * `#values <file>` attaches numeric values to the column domain, read from
//!   `label<TAB>value` lines in `<file>` (relative to the relation file).
//! * `#rowlabels` / `#collabels` followed by tab-separated labels fix the
//!   domain order and keep labels that have no edges.
//!
//! Other lines starting with `#` and blank lines are ignored. Labels appear in
//! declaration order, then in order of first use.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::domain::AttributeDomain;
use crate::error::{Error, Result};
use crate::relation::BinaryRelation;

#[derive(Debug)]
struct RawRelation {
    path: PathBuf,
    row_domain: String,
    col_domain: String,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    values: Option<BTreeMap<String, f64>>,
    edges: Vec<(String, String)>,
}

fn parse_error(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| {
        let line = e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        parse_error(path, line, "invalid UTF-8")
    })
}

fn tab_fields(rest: &str) -> Vec<String> {
    rest.split('\t').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// Reads a `label<TAB>value` file.
pub fn read_values(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, value) = line
            .split_once('\t')
            .ok_or_else(|| parse_error(path, n + 1, "expected `label<TAB>value`"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| parse_error(path, n + 1, format!("`{}` is not a number", value.trim())))?;
        if out.insert(label.to_string(), value).is_some() {
            return Err(parse_error(path, n + 1, format!("duplicate label `{label}`")));
        }
    }
    Ok(out)
}

fn parse_relation(path: &Path) -> Result<RawRelation> {
    let text = read_text(path)?;
    let mut row_domain = None;
    let mut col_domain = None;
    let mut values = None;
    let mut row_labels = Vec::new();
    let mut col_labels = Vec::new();
    let mut edges = Vec::new();
    let mut first_edge_line = None;

    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let lineno = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let (key, rest) = header.split_once([' ', '\t']).unwrap_or((header, ""));
            match key {
                "rowdomain" | "coldomain" => {
                    let name = rest.trim();
                    if name.is_empty() {
                        return Err(parse_error(path, lineno, format!("#{key} needs a name")));
                    }
                    let slot = if key == "rowdomain" {
                        &mut row_domain
                    } else {
                        &mut col_domain
                    };
                    *slot = Some(name.to_string());
                }
                "values" => {
                    let file = rest.trim();
                    if file.is_empty() {
                        return Err(parse_error(path, lineno, "#values needs a file name"));
                    }
                    let base = path.parent().unwrap_or(Path::new("."));
                    values = Some(read_values(&base.join(file))?);
                }
                "rowlabels" => row_labels.extend(tab_fields(rest)),
                "collabels" => col_labels.extend(tab_fields(rest)),
                _ => {}
            }
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next(), fields.next()) {
            (Some(r), Some(c), None) if !r.is_empty() && !c.is_empty() => {
                first_edge_line.get_or_insert(lineno);
                edges.push((r.to_string(), c.to_string()));
            }
            _ => {
                return Err(parse_error(
                    path,
                    lineno,
                    format!("expected `row<TAB>col`, got `{line}`"),
                ))
            }
        }
    }

    let at = first_edge_line.unwrap_or(1);
    let row_domain = row_domain.ok_or_else(|| parse_error(path, at, "missing #rowdomain header"))?;
    let col_domain = col_domain.ok_or_else(|| parse_error(path, at, "missing #coldomain header"))?;
    Ok(RawRelation {
        path: path.to_path_buf(),
        row_domain,
        col_domain,
        row_labels,
        col_labels,
        values,
        edges,
    })
}

#[derive(Default)]
struct DomainBuilder {
    labels: Vec<String>,
    seen: HashMap<String, usize>,
    values: BTreeMap<String, f64>,
    has_values: bool,
}

impl DomainBuilder {
    fn add(&mut self, label: &str) {
        if !self.seen.contains_key(label) {
            self.seen.insert(label.to_string(), self.labels.len());
            self.labels.push(label.to_string());
        }
    }

    fn build(self, name: &str) -> Result<Arc<AttributeDomain>> {
        let domain = AttributeDomain::new(name, self.labels)?;
        if !self.has_values {
            return Ok(domain.shared());
        }
        let values = domain
            .labels()
            .iter()
            .map(|l| {
                self.values.get(l).copied().ok_or_else(|| Error::ValueCountMismatch {
                    domain: name.to_string(),
                    labels: domain.len(),
                    values: self.values.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(domain.with_values(values)?.shared())
    }
}

/// Reads one relation file.
pub fn read_relation(path: impl AsRef<Path>) -> Result<BinaryRelation> {
    Ok(read_relations(&[path])?.remove(0))
}

/// Reads several relation files. Domains with the same name are merged: they
/// share one label list (union in load order), so the relations join.
pub fn read_relations<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<BinaryRelation>> {
    let raws = paths
        .iter()
        .map(|p| parse_relation(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;

    let mut builders: Vec<(String, DomainBuilder)> = Vec::new();
    fn builder<'a>(list: &'a mut Vec<(String, DomainBuilder)>, name: &str) -> &'a mut DomainBuilder {
        let i = match list.iter().position(|(n, _)| n == name) {
            Some(i) => i,
            None => {
                list.push((name.to_string(), DomainBuilder::default()));
                list.len() - 1
            }
        };
        &mut list[i].1
    }
    for raw in &raws {
        let rows = builder(&mut builders, &raw.row_domain);
        raw.row_labels.iter().for_each(|l| rows.add(l));
        let cols = builder(&mut builders, &raw.col_domain);
        raw.col_labels.iter().for_each(|l| cols.add(l));
    }
    for raw in &raws {
        for (r, c) in &raw.edges {
            builder(&mut builders, &raw.row_domain).add(r);
            builder(&mut builders, &raw.col_domain).add(c);
        }
        if let Some(values) = &raw.values {
            let cols = builder(&mut builders, &raw.col_domain);
            for (label, &v) in values {
                if let Some(&old) = cols.values.get(label) {
                    if old != v {
                        return Err(parse_error(
                            &raw.path,
                            1,
                            format!("label `{label}` of `{}` has conflicting values", raw.col_domain),
                        ));
                    }
                }
                cols.values.insert(label.clone(), v);
            }
            cols.has_values = true;
        }
    }

    let mut domains = HashMap::new();
    for (name, b) in builders {
        let domain = b.build(&name)?;
        domains.insert(name, domain);
    }

    raws.iter()
        .map(|raw| {
            let rows = domains[&raw.row_domain].clone();
            let cols = domains[&raw.col_domain].clone();
            let edges = raw
                .edges
                .iter()
                .map(|(r, c)| (rows.index_of(r).expect("added"), cols.index_of(c).expect("added")));
            BinaryRelation::new(rows.clone(), cols.clone(), edges)
        })
        .collect()
}

fn check_label(domain: &AttributeDomain, label: &str) -> Result<()> {
    if label.contains(['\t', '\n', '\r']) || label.starts_with('#') || label.trim() != label || label.is_empty() {
        return Err(Error::config(
            domain.name(),
            format!("label `{label}` cannot be written in the relation format"),
        ));
    }
    Ok(())
}

/// Renders a relation in the text format. With `values_file`, a `#values`
/// header pointing at it is included.
pub fn relation_to_string(rel: &BinaryRelation, values_file: Option<&str>) -> Result<String> {
    let (rows, cols) = (rel.row_domain(), rel.col_domain());
    for l in rows.labels() {
        check_label(rows, l)?;
    }
    for l in cols.labels() {
        check_label(cols, l)?;
    }
    let mut out = format!("#rowdomain {}\n#coldomain {}\n", rows.name(), cols.name());
    if let Some(file) = values_file {
        out.push_str(&format!("#values {file}\n"));
    }
    out.push_str(&format!("#rowlabels\t{}\n", rows.labels().join("\t")));
    out.push_str(&format!("#collabels\t{}\n", cols.labels().join("\t")));
    for (i, j) in rel.edges() {
        out.push_str(rows.label(i));
        out.push('\t');
        out.push_str(cols.label(j));
        out.push('\n');
    }
    Ok(out)
}

/// Writes a relation file. If the column domain carries numeric values they
/// go to `<stem>.values.tsv` next to it, referenced by a `#values` header.
pub fn write_relation(rel: &BinaryRelation, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let values_file = match rel.col_domain().values() {
        Some(_) => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("relation");
            let name = format!("{stem}.values.tsv");
            write_values(rel.col_domain(), path.with_file_name(&name))?;
            Some(name)
        }
        None => None,
    };
    let text = relation_to_string(rel, values_file.as_deref())?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `label<TAB>value` lines for a numeric domain.
pub fn write_values(domain: &AttributeDomain, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let values = domain
        .values()
        .ok_or_else(|| Error::MissingNumericValues(domain.name().to_string()))?;
    let mut out = String::new();
    for (label, v) in domain.labels().iter().zip(values) {
        check_label(domain, label)?;
        out.push_str(&format!("{label}\t{v}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn round_trip_toy_chain() {
        let dir = tempfile::tempdir().unwrap();
        let names = ["gm.tsv", "md.tsv", "da.tsv"];
        for (rel, name) in [toy::gm(), toy::md(), toy::da()].iter().zip(names) {
            write_relation(rel, dir.path().join(name)).unwrap();
        }
        let paths: Vec<PathBuf> = names.iter().map(|n| dir.path().join(n)).collect();
        let rels = read_relations(&paths).unwrap();
        assert_eq!(rels[0], toy::gm());
        assert_eq!(rels[1], toy::md());
        assert_eq!(rels[2], toy::da());
        assert_eq!(rels[2].col_domain().values(), Some(&[30.0, 60.0][..]));
        assert!(Arc::ptr_eq(rels[0].col_domain(), rels[1].row_domain()));
    }

    #[test]
    fn labels_follow_first_use_and_domains_merge() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.tsv", "#rowdomain X\n#coldomain Y\nx2\ty1\nx1\ty2\n");
        let b = write(dir.path(), "b.tsv", "# comment\n#rowdomain Y\n#coldomain Z\ny3\tz1\n\n");
        let rels = read_relations(&[a, b]).unwrap();
        assert_eq!(rels[0].row_domain().labels(), &["x2", "x1"]);
        assert_eq!(rels[0].col_domain().labels(), &["y1", "y2", "y3"]);
        assert!(rels[0].path_product(&rels[1]).is_ok());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.tsv", "#rowdomain X\n#coldomain Y\na\tb\nonly-one-field\n");
        let err = read_relation(&p).unwrap_err().to_string();
        assert!(err.contains("bad.tsv:4"), "{err}");
    }

    #[test]
    fn missing_header_and_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "h.tsv", "#rowdomain X\na\tb\n");
        assert!(read_relation(&p).unwrap_err().to_string().contains("#coldomain"));
        assert!(matches!(read_relation(dir.path().join("nope.tsv")), Err(Error::Io { .. })));
    }

    #[test]
    fn values_must_cover_every_label() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "ages.tsv", "30\t30\n");
        let p = write(dir.path(), "da.tsv", "#rowdomain D\n#coldomain Age\n#values ages.tsv\nw\t30\ng\t60\n");
        assert!(matches!(read_relation(&p), Err(Error::ValueCountMismatch { .. })));
    }

    #[test]
    fn isolated_labels_survive() {
        let dir = tempfile::tempdir().unwrap();
        let rel = BinaryRelation::from_bits(&[[0, 0], [0, 1]]);
        let p = dir.path().join("r.tsv");
        write_relation(&rel, &p).unwrap();
        assert_eq!(read_relation(&p).unwrap(), rel);
    }
}
