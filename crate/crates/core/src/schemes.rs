//! Linear broadcast schemes: decodability, validation, the one-transmission
//! criterion and a greedy builder.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{PicodError, Result};
use crate::gflin::{Matrix, PrimeField};
use crate::instance::{MessageSet, PicodInstance};

/// `l` transmissions over `F_q`; row `k` holds the coefficients of
/// transmission `k` on messages `1..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearScheme {
    matrix: Matrix,
}

#[derive(Serialize, Deserialize)]
struct SchemeFile {
    q: u64,
    rows: Vec<Vec<u64>>,
}

impl LinearScheme {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.rows() == 0 {
            return Err(PicodError::InvalidArgument(
                "a scheme needs at least one transmission".into(),
            ));
        }
        if let Some(k) = matrix.row_iter().position(|r| r.iter().all(|&v| v == 0)) {
            return Err(PicodError::InvalidArgument(format!(
                "transmission {} is all-zero",
                k + 1
            )));
        }
        Ok(LinearScheme { matrix })
    }

    pub fn from_rows(field: PrimeField, m: usize, rows: &[Vec<u64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(field, m, rows)?)
    }

    /// Parses `{"q": 2, "rows": [[1,0,0,0], ...]}`.
    pub fn load(bytes: &[u8]) -> Result<Self> {
        let file: SchemeFile =
            serde_json::from_slice(bytes).map_err(|e| PicodError::Malformed(e.to_string()))?;
        let field = PrimeField::new(file.q)?;
        let cols = file
            .rows
            .first()
            .map(|r| r.len())
            .ok_or_else(|| PicodError::InvalidArgument("scheme has no rows".into()))?;
        if let Some(bad) = file.rows.iter().flatten().find(|&&v| v >= file.q) {
            return Err(PicodError::InvalidArgument(format!(
                "coefficient {bad} is not reduced mod {}",
                file.q
            )));
        }
        Self::from_rows(field, cols, &file.rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.file()).expect("scheme serialization")
    }

    fn file(&self) -> SchemeFile {
        SchemeFile {
            q: self.matrix.field().q() as u64,
            rows: self
                .matrix
                .row_iter()
                .map(|r| r.iter().map(|&v| v as u64).collect())
                .collect(),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn field(&self) -> PrimeField {
        self.matrix.field()
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn m(&self) -> usize {
        self.matrix.cols()
    }

    /// The first `k` transmissions.
    pub fn prefix(&self, k: usize) -> Matrix {
        let cols = self.matrix.cols();
        Matrix::from_raw(
            self.field(),
            k,
            cols,
            self.matrix.entries()[..k * cols].to_vec(),
        )
    }
}

impl Serialize for LinearScheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.file().serialize(s)
    }
}

/// Messages a client with request set `request` can decode from the row
/// space of `matrix`.
///
/// After cancelling its side information the client sees `A|_R b_R`, so
/// message `j` is decodable iff `e_j|_R` lies in the row space of `A|_R`. In
/// RREF that happens exactly when some basis row is the unit vector at `j`.
pub fn decodable_messages(matrix: &Matrix, request: MessageSet) -> MessageSet {
    if matrix.rows() == 0 {
        return MessageSet::EMPTY;
    }
    let cols: Vec<usize> = request.iter().collect();
    let (rref, pivots) = matrix.select_columns(&cols).rref();
    let mut out = MessageSet::EMPTY;
    for (r, &p) in pivots.iter().enumerate() {
        if rref.row(r).iter().filter(|&&v| v != 0).count() == 1 {
            out = out.insert(cols[p]);
        }
    }
    out
}

fn first_decodable(matrix: &Matrix, request: MessageSet) -> Option<usize> {
    decodable_messages(matrix, request).iter().next()
}

fn check_columns(inst: &PicodInstance, scheme: &LinearScheme) -> Result<()> {
    if scheme.m() != inst.m() {
        return Err(PicodError::DimensionMismatch {
            expected: inst.m(),
            got: scheme.m(),
        });
    }
    Ok(())
}

/// Smallest message client `i` can decode, or `None` if it is unsatisfied.
pub fn client_satisfied(
    inst: &PicodInstance,
    i: usize,
    scheme: &LinearScheme,
) -> Result<Option<usize>> {
    check_columns(inst, scheme)?;
    let r = inst.request_set(i)?.messages;
    Ok(first_decodable(scheme.matrix(), r))
}

/// Per-client outcome of a scheme: the decoded witness message, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfactionReport {
    pub witnesses: Vec<Option<usize>>,
}

impl SatisfactionReport {
    pub fn all_satisfied(&self) -> bool {
        self.witnesses.iter().all(Option::is_some)
    }

    pub fn satisfied_clients(&self) -> Vec<usize> {
        (0..self.witnesses.len())
            .filter(|&i| self.witnesses[i].is_some())
            .collect()
    }

    pub fn satisfied_count(&self) -> usize {
        self.witnesses.iter().flatten().count()
    }
}

pub fn validate_scheme(inst: &PicodInstance, scheme: &LinearScheme) -> Result<SatisfactionReport> {
    check_columns(inst, scheme)?;
    Ok(satisfaction(inst, scheme.matrix()))
}

pub(crate) fn satisfaction(inst: &PicodInstance, matrix: &Matrix) -> SatisfactionReport {
    let m = inst.m();
    SatisfactionReport {
        witnesses: inst
            .clients()
            .iter()
            .map(|s| first_decodable(matrix, s.complement(m)))
            .collect(),
    }
}

/// Cheaper than [`satisfaction`]: stops at the first unsatisfied client.
pub(crate) fn satisfies_all(inst: &PicodInstance, matrix: &Matrix) -> bool {
    let m = inst.m();
    inst.clients()
        .iter()
        .all(|s| !decodable_messages(matrix, s.complement(m)).is_empty())
}

/// For each transmission `k`, the clients first satisfied once rows `1..=k`
/// have been received.
pub fn incremental_satisfaction(
    inst: &PicodInstance,
    scheme: &LinearScheme,
) -> Result<Vec<Vec<usize>>> {
    check_columns(inst, scheme)?;
    let mut done = vec![false; inst.n()];
    let mut out = Vec::with_capacity(scheme.len());
    for k in 1..=scheme.len() {
        let report = satisfaction(inst, &scheme.prefix(k));
        let mut fresh = Vec::new();
        for (i, w) in report.witnesses.iter().enumerate() {
            if w.is_some() && !done[i] {
                done[i] = true;
                fresh.push(i);
            }
        }
        out.push(fresh);
    }
    Ok(out)
}

/// A support `T` with `|T \ S_i| = 1` for every client, if one exists; the
/// single transmission `sum_{j in T} b_j` then satisfies everybody. Only the
/// support of a one-row scheme matters, so this is field-independent.
pub fn one_shot_feasible(inst: &PicodInstance, budget: &Budget) -> Result<Option<MessageSet>> {
    let m = inst.m();
    budget.check_m("one-transmission search (2^m supports)", m)?;
    let mut best: Option<MessageSet> = None;
    for bits in 1u64..(1u64 << m) {
        let t = MessageSet(bits);
        if inst.clients().iter().all(|s| t.difference(*s).len() == 1)
            && best.is_none_or(|b| t.canonical_cmp(&b).is_lt())
        {
            best = Some(t);
        }
    }
    Ok(best)
}

/// Candidate coefficient vectors in tie-break order: support size, then
/// sorted support, then coefficients. For `q > 2` only vectors whose first
/// non-zero entry is 1 are kept (one per projective point).
fn candidate_pool(m: usize, field: PrimeField) -> Vec<Vec<u8>> {
    let q = field.q() as u64;
    let total = q.pow(m as u32);
    let mut pool: Vec<Vec<u8>> = (1..total)
        .map(|mut code| {
            (0..m)
                .map(|_| {
                    let v = (code % q) as u8;
                    code /= q;
                    v
                })
                .collect::<Vec<u8>>()
        })
        .filter(|v| v.iter().find(|&&x| x != 0) == Some(&1))
        .collect();
    pool.sort_by(|a, b| {
        let sa: Vec<usize> = (0..m).filter(|&k| a[k] != 0).collect();
        let sb: Vec<usize> = (0..m).filter(|&k| b[k] != 0).collect();
        sa.len().cmp(&sb.len()).then(sa.cmp(&sb)).then(a.cmp(b))
    });
    pool
}

/// Greedy achievable scheme: each round appends the candidate vector that
/// newly satisfies the most clients. Length is at most `n`.
pub fn greedy_scheme(
    inst: &PicodInstance,
    field: PrimeField,
    budget: &Budget,
) -> Result<LinearScheme> {
    let m = inst.m();
    let pool_size = (field.q() as u128).pow(m as u32);
    Budget::check(
        "greedy candidate pool (q^m vectors)",
        pool_size,
        1u128 << budget.max_m,
    )?;
    let pool = candidate_pool(m, field);
    let requests: Vec<MessageSet> = inst.clients().iter().map(|s| s.complement(m)).collect();
    let mut matrix = Matrix::zeros(field, 0, m);
    let mut unsatisfied: Vec<MessageSet> = requests;
    while !unsatisfied.is_empty() {
        let scores: Vec<usize> = pool
            .par_iter()
            .map(|cand| {
                let mut trial = matrix.clone();
                trial.push_row(cand).expect("candidate width");
                unsatisfied
                    .iter()
                    .filter(|&&r| !decodable_messages(&trial, r).is_empty())
                    .count()
            })
            .collect();
        let (best, &score) = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty pool");
        debug_assert!(score > 0, "a unit vector always makes progress");
        matrix.push_row(&pool[best])?;
        unsatisfied.retain(|&r| decodable_messages(&matrix, r).is_empty());
    }
    LinearScheme::new(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::builtin::{example2, singletons_3};

    fn gf2() -> PrimeField {
        PrimeField::GF2
    }

    fn set(l: &[usize]) -> MessageSet {
        MessageSet::from_labels(l)
    }

    fn paper_scheme() -> LinearScheme {
        LinearScheme::from_rows(
            gf2(),
            4,
            &[vec![1, 0, 0, 0], vec![0, 1, 0, 1], vec![1, 1, 1, 0]],
        )
        .unwrap()
    }

    #[test]
    fn client_witnesses() {
        let ex = example2();
        let first = LinearScheme::from_rows(gf2(), 4, &[vec![1, 0, 0, 0]]).unwrap();
        assert_eq!(client_satisfied(&ex, 2, &first).unwrap(), Some(0));
        let second = LinearScheme::from_rows(gf2(), 4, &[vec![0, 1, 0, 1]]).unwrap();
        assert_eq!(client_satisfied(&ex, 1, &second).unwrap(), Some(3));

        let inst = PicodInstance::new(3, vec![MessageSet::EMPTY]).unwrap();
        let sum = LinearScheme::from_rows(gf2(), 3, &[vec![1, 1, 0]]).unwrap();
        assert_eq!(client_satisfied(&inst, 0, &sum).unwrap(), None);
    }

    #[test]
    fn example_scheme_validates() {
        let ex = example2();
        let report = validate_scheme(&ex, &paper_scheme()).unwrap();
        assert!(report.all_satisfied());
        assert_eq!(report.satisfied_count(), 11);

        let first = LinearScheme::from_rows(gf2(), 4, &[vec![1, 0, 0, 0]]).unwrap();
        let report = validate_scheme(&ex, &first).unwrap();
        assert_eq!(report.satisfied_clients(), vec![0, 2, 7, 8, 9]);
    }

    #[test]
    fn per_transmission_sets() {
        let got = incremental_satisfaction(&example2(), &paper_scheme()).unwrap();
        assert_eq!(
            got,
            vec![vec![0, 2, 7, 8, 9], vec![1, 3, 4, 6], vec![5, 10]]
        );
    }

    #[test]
    fn identity_satisfies_everyone() {
        for inst in [example2(), singletons_3()] {
            let id = LinearScheme::new(Matrix::identity(gf2(), inst.m())).unwrap();
            assert!(validate_scheme(&inst, &id).unwrap().all_satisfied());
        }
    }

    #[test]
    fn dimension_mismatch() {
        let s = LinearScheme::from_rows(gf2(), 3, &[vec![1, 0, 0]]).unwrap();
        assert!(matches!(
            validate_scheme(&example2(), &s),
            Err(PicodError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_zero_rows() {
        assert!(LinearScheme::from_rows(gf2(), 2, &[vec![0, 0]]).is_err());
        assert!(LinearScheme::load(br#"{"q":2,"rows":[]}"#).is_err());
        assert!(LinearScheme::load(br#"{"q":4,"rows":[[1]]}"#).is_err());
        assert!(LinearScheme::load(br#"{"q":3,"rows":[[3]]}"#).is_err());
    }

    #[test]
    fn scheme_file_roundtrip() {
        let s = paper_scheme();
        assert_eq!(LinearScheme::load(s.to_json().as_bytes()).unwrap(), s);
    }

    #[test]
    fn one_shot() {
        let b = Budget::default();
        for sets in [
            vec![set(&[1])],
            vec![set(&[1]), set(&[2])],
            vec![set(&[]), set(&[1, 2])],
        ] {
            let inst = PicodInstance::new(3, sets).unwrap();
            assert!(one_shot_feasible(&inst, &b).unwrap().is_some());
        }
        assert_eq!(one_shot_feasible(&singletons_3(), &b).unwrap(), None);
        let pairs = PicodInstance::new(3, vec![set(&[1, 2]), set(&[2, 3]), set(&[1, 3])]).unwrap();
        assert_eq!(
            one_shot_feasible(&pairs, &b).unwrap(),
            Some(set(&[1, 2, 3]))
        );
    }

    #[test]
    fn greedy_examples() {
        let b = Budget::default();
        let single = PicodInstance::new(4, vec![set(&[2])]).unwrap();
        assert_eq!(greedy_scheme(&single, gf2(), &b).unwrap().len(), 1);

        let ex = example2();
        let g = greedy_scheme(&ex, gf2(), &b).unwrap();
        assert!(validate_scheme(&ex, &g).unwrap().all_satisfied());
        assert!(g.len() >= 3);

        let s3 = greedy_scheme(&singletons_3(), gf2(), &b).unwrap();
        assert_eq!(s3.len(), 2);
        assert!(validate_scheme(&singletons_3(), &s3)
            .unwrap()
            .all_satisfied());

        let f3 = PrimeField::new(3).unwrap();
        let g3 = greedy_scheme(&ex, f3, &b).unwrap();
        assert!(validate_scheme(&ex, &g3).unwrap().all_satisfied());
    }

    #[test]
    fn greedy_budget() {
        let b = Budget {
            max_m: 3,
            ..Budget::default()
        };
        assert!(greedy_scheme(&example2(), gf2(), &b)
            .unwrap_err()
            .is_budget());
    }

    #[test]
    fn candidate_pool_is_projective() {
        let f3 = PrimeField::new(3).unwrap();
        // (3^3 - 1) / 2 projective points
        assert_eq!(candidate_pool(3, f3).len(), 13);
        assert_eq!(candidate_pool(3, gf2()).len(), 7);
        assert_eq!(candidate_pool(3, gf2())[0], vec![1, 0, 0]);
    }
}
