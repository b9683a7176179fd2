//! File formats: JSON matrices, determinantal instances and variable sets,
//! whitespace-separated vector systems, graph and polynomial text.
//!
//! Parse errors carry a location (JSON line/column or text line number).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianMatrix};
use crate::mixed::DiscreteMatrixVariable;
use crate::ramanujan::{Graph, SignedGraph};
use crate::realpoly::RealPoly;
use crate::stable::DeterminantalPoly;
use crate::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.n;
        check_square("re", &self.re, n)?;
        if let Some(im) = &self.im {
            check_square("im", im, n)?;
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.re[i][j], im)
        }))
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let (r, c) = m.shape();
        debug_assert_eq!(r, c);
        let re = (0..r).map(|i| (0..c).map(|j| m[(i, j)].re).collect()).collect();
        let im: Vec<Vec<f64>> = (0..r).map(|i| (0..c).map(|j| m[(i, j)].im).collect()).collect();
        let any_im = im.iter().flatten().any(|&x| x != 0.0);
        Self { n: r, re, im: any_im.then_some(im) }
    }
}

fn check_square(name: &str, rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::Validation(format!("\"{name}\" has {} rows, expected n = {n}", rows.len())));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Validation(format!("\"{name}\" row {i} has {} entries, expected {n}", row.len())));
    }
    Ok(())
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Validation(format!("line {} column {}: {e}", e.line(), e.column())))
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    from_json::<MatrixFile>(text)?.to_matrix()
}

pub fn parse_hermitian(text: &str) -> Result<HermitianMatrix> {
    from_json::<MatrixFile>(text)?.to_hermitian()
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    serde_json::to_string(&MatrixFile::from_matrix(m)).expect("matrix serializes")
}

fn hermitian_list(m: usize, mats: &[MatrixFile], what: &str) -> Result<Vec<HermitianMatrix>> {
    mats.iter()
        .enumerate()
        .map(|(k, f)| {
            if f.n != m {
                return Err(Error::Validation(format!("{what} {k}: n = {} but m = {m}", f.n)));
            }
            f.to_hermitian().map_err(|e| Error::Validation(format!("{what} {k}: {e}")))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeterminantalFile {
    pub m: usize,
    pub include_z_identity: bool,
    pub matrices: Vec<MatrixFile>,
}

pub fn parse_determinantal(text: &str) -> Result<DeterminantalPoly> {
    let f: DeterminantalFile = from_json(text)?;
    DeterminantalPoly::new(hermitian_list(f.m, &f.matrices, "matrix")?, f.include_z_identity)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariableFile {
    pub outcomes: Vec<MatrixFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariableSetFile {
    pub m: usize,
    pub variables: Vec<VariableFile>,
}

pub fn parse_variable_set(text: &str) -> Result<Vec<DiscreteMatrixVariable>> {
    let f: VariableSetFile = from_json(text)?;
    f.variables
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let outcomes = hermitian_list(f.m, &v.outcomes, &format!("variable {k} outcome"))?;
            DiscreteMatrixVariable::new(outcomes, v.weights.clone())
                .map_err(|e| Error::Validation(format!("variable {k}: {e}")))
        })
        .collect()
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn numbers<T: std::str::FromStr>(line_no: usize, line: &str) -> Result<Vec<T>> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Error::Validation(format!("line {line_no}: cannot parse {t:?}"))))
        .collect()
}

/// One vector per line, `2m` numbers `re₁ im₁ re₂ im₂ ..`, separated by
/// whitespace or commas. Blank lines and `#` comments are skipped.
pub fn parse_vectors(text: &str) -> Result<Vec<CVector>> {
    let mut out = Vec::new();
    let mut width = None;
    for (line_no, line) in content_lines(text) {
        let xs: Vec<f64> = numbers(line_no, line)?;
        if xs.is_empty() || !xs.len().is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "line {line_no}: expected an even number of values (re/im pairs), got {}",
                xs.len()
            )));
        }
        if *width.get_or_insert(xs.len()) != xs.len() {
            return Err(Error::Validation(format!(
                "line {line_no}: {} values, previous rows have {}",
                xs.len(),
                width.unwrap()
            )));
        }
        out.push(CVector::from_iterator(xs.len() / 2, xs.chunks(2).map(|c| Complex64::new(c[0], c[1]))));
    }
    if out.is_empty() {
        return Err(Error::Validation("no vectors in input".into()));
    }
    Ok(out)
}

pub fn vectors_to_text(vectors: &[CVector]) -> String {
    let mut s = String::new();
    for v in vectors {
        let row: Vec<String> = v.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// A graph file, signed when its edge lines carry a third column.
#[derive(Clone, Debug)]
pub enum GraphFile {
    Plain(Graph),
    Signed(SignedGraph),
}

impl GraphFile {
    pub fn graph(&self) -> &Graph {
        match self {
            Self::Plain(g) => g,
            Self::Signed(s) => s.base(),
        }
    }
}

/// `n m` on the first line, then `m` lines `u v` or `u v s`.
pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| Error::Validation("empty graph file".into()))?;
    let h: Vec<usize> = numbers(hl, header)?;
    let [n, m] = h[..] else {
        return Err(Error::Validation(format!("line {hl}: expected \"n m\"")));
    };
    let mut edges = Vec::with_capacity(m);
    let mut signs: Vec<(usize, usize, i8)> = Vec::new();
    let mut signed = None;
    for (line_no, line) in lines {
        let xs: Vec<i64> = numbers(line_no, line)?;
        let is_signed = match xs.len() {
            2 => false,
            3 => true,
            k => return Err(Error::Validation(format!("line {line_no}: expected 2 or 3 values, got {k}"))),
        };
        if *signed.get_or_insert(is_signed) != is_signed {
            return Err(Error::Validation(format!("line {line_no}: mixes signed and unsigned edge lines")));
        }
        if xs[0] < 0 || xs[1] < 0 {
            return Err(Error::Validation(format!("line {line_no}: negative vertex index")));
        }
        let (u, v) = (xs[0] as usize, xs[1] as usize);
        if u >= n || v >= n {
            return Err(Error::Validation(format!("line {line_no}: vertex out of range for n = {n}")));
        }
        if is_signed {
            if xs[2] != 1 && xs[2] != -1 {
                return Err(Error::Validation(format!("line {line_no}: sign {} is not ±1", xs[2])));
            }
            signs.push((u.min(v), u.max(v), xs[2] as i8));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::Validation(format!("header declares {m} edges, found {}", edges.len())));
    }
    let g = Graph::new(n, edges)?;
    if signed == Some(true) {
        signs.sort_unstable();
        let s = signs.into_iter().map(|(_, _, s)| s).collect();
        Ok(GraphFile::Signed(SignedGraph::new(g, s)?))
    } else {
        Ok(GraphFile::Plain(g))
    }
}

pub fn graph_to_text(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.num_edges());
    for (u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

pub fn signed_graph_to_text(sg: &SignedGraph) -> String {
    let g = sg.base();
    let mut s = format!("{} {}\n", g.n(), g.num_edges());
    for ((u, v), sign) in g.edges().iter().zip(sg.signs()) {
        s.push_str(&format!("{u} {v} {sign}\n"));
    }
    s
}

pub fn parse_polynomial(text: &str) -> Result<RealPoly> {
    RealPoly::parse(text)
}

pub fn polynomial_to_text(p: &RealPoly) -> String {
    p.to_text()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip_and_default_imaginary_part() {
        let m = parse_matrix(r#"{"n": 2, "re": [[1, 0.5], [0.5, 2]]}"#).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.5, 0.0));
        let back = parse_matrix(&matrix_to_json(&m)).unwrap();
        assert_eq!(back, m);
        let h = parse_hermitian(r#"{"n": 2, "re": [[1, 0], [0, 1]], "im": [[0, 1], [-1, 0]]}"#).unwrap();
        assert_eq!(h.get(0, 1), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn matrix_errors_have_locations() {
        let e = parse_matrix("{\"n\": 2,\n \"re\": [[1, 0], [0 1]]}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_matrix(r#"{"n": 2, "re": [[1, 0]]}"#).unwrap_err();
        assert!(e.to_string().contains("rows"));
        assert!(parse_hermitian(r#"{"n": 2, "re": [[1, 1], [0, 1]]}"#).is_err());
    }

    #[test]
    fn determinantal_and_variable_files() {
        let p = parse_determinantal(
            r#"{"m": 2, "include_z_identity": true,
                "matrices": [{"n": 2, "re": [[1,0],[0,0]]}, {"n": 2, "re": [[0,0],[0,1]]}]}"#,
        )
        .unwrap();
        assert_eq!(p.d(), 2);
        let vars = parse_variable_set(
            r#"{"m": 1, "variables": [{"outcomes": [{"n":1,"re":[[0]]}, {"n":1,"re":[[2]]}], "weights": [0.5, 0.5]}]}"#,
        )
        .unwrap();
        assert!((vars[0].mean().get(0, 0).re - 1.0).abs() < 1e-15);
        assert!(parse_variable_set(r#"{"m": 2, "variables": [{"outcomes": [{"n":1,"re":[[0]]}]}]}"#).is_err());
    }

    #[test]
    fn vectors_parse_and_roundtrip() {
        let v = parse_vectors("# comment\n1 0 0 1\n0.5, -0.5, 2, 0\n").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0][1], Complex64::new(0.0, 1.0));
        assert_eq!(parse_vectors(&vectors_to_text(&v)).unwrap(), v);
        assert!(parse_vectors("1 0\n1 0 0 0\n").unwrap_err().to_string().contains("line 2"));
        assert!(parse_vectors("1 0 1\n").is_err());
    }

    #[test]
    fn graphs_parse_and_roundtrip() {
        let g = Graph::petersen();
        let GraphFile::Plain(back) = parse_graph(&graph_to_text(&g)).unwrap() else { panic!() };
        assert_eq!(back, g);
        let sg = SignedGraph::from_mask(Graph::complete(3), 0b101);
        let GraphFile::Signed(back) = parse_graph(&signed_graph_to_text(&sg)).unwrap() else { panic!() };
        assert_eq!(back, sg);
        let GraphFile::Signed(sg) = parse_graph("3 3\n2 1 -1\n0 1 1\n0 2 1\n").unwrap() else { panic!() };
        assert_eq!(sg.signs(), &[1, 1, -1]);
        assert!(parse_graph("3 2\n0 1\n").unwrap_err().to_string().contains("declares"));
        assert!(parse_graph("3 2\n0 1\n1 2 1\n").unwrap_err().to_string().contains("line 3"));
        assert!(parse_graph("3 1\n0 3\n").is_err());
        assert!(parse_graph("3 1\n0 1 2\n").is_err());
    }

    #[test]
    fn polynomial_text() {
        let p = parse_polynomial("1 -2 1").unwrap();
        assert_eq!(p, RealPoly::new(vec![1.0, -2.0, 1.0]));
        assert_eq!(parse_polynomial(&polynomial_to_text(&p)).unwrap(), p);
    }
}
