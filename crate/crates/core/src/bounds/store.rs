//! Bound certificates, the on-disk certificate store and best-known tables.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::closed::{gamma_ratio, interval_lo_f64};
use crate::error::{Error, Result};
use crate::exact::{ExactScalar, RationalInterval};

/// Largest order covered by [`CertificateStore::report`].
pub const MAX_REPORT_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Where a bound comes from. Heuristic bounds are never upgraded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Exact `SDP_n` with an optimality proof.
    Exact,
    /// `SDP_n` from the alternating heuristic; putative only.
    Heuristic,
    ClosedForm,
    /// Constant proved elsewhere, entered as data.
    Literature,
    /// Published computation too large to rerun here, entered as data.
    Reported,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Heuristic => "heuristic",
            Provenance::ClosedForm => "closed-form",
            Provenance::Literature => "literature",
            Provenance::Reported => "reported",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum BoundValue {
    Exact(ExactScalar),
    /// Outward-rounded enclosure `[lo, hi]`.
    Interval(f64, f64),
    Float(f64),
}

impl BoundValue {
    pub fn interval(i: &RationalInterval) -> Self {
        BoundValue::Interval(interval_lo_f64(i), super::closed::interval_hi_f64(i))
    }

    pub fn lo_f64(&self) -> f64 {
        match self {
            BoundValue::Exact(value) => interval_lo_f64(&value.enclosure(80)),
            BoundValue::Interval(lo, _) => *lo,
            BoundValue::Float(value) => *value,
        }
    }

    pub fn hi_f64(&self) -> f64 {
        match self {
            BoundValue::Exact(value) => super::closed::interval_hi_f64(&value.enclosure(80)),
            BoundValue::Interval(_, hi) => *hi,
            BoundValue::Float(value) => *value,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            BoundValue::Exact(value) => value.to_f64(),
            BoundValue::Interval(lo, hi) => (lo + hi) / 2.0,
            BoundValue::Float(value) => *value,
        }
    }

    pub fn display(&self) -> String {
        match self {
            BoundValue::Exact(value) => value.to_string(),
            BoundValue::Interval(lo, hi) => format!("[{lo:.9}, {hi:.9}]"),
            BoundValue::Float(value) => format!("{value:.5}"),
        }
    }
}

/// A lower or upper bound on `K_G(d→n)` (`n = 1` is `K_G(d)`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub id: String,
    pub d: usize,
    pub n: usize,
    pub kind: BoundKind,
    pub value: BoundValue,
    pub provenance: Provenance,
    /// Short description or citation tag.
    pub source: String,
    pub witness: Value,
    /// Ids of the certificates this one was derived from.
    #[serde(default)]
    pub chain: Vec<String>,
}

impl BoundCertificate {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// The safe side of the value: rounded down for lower bounds, up for
    /// upper bounds.
    pub fn conservative_f64(&self) -> f64 {
        match self.kind {
            BoundKind::Lower => self.value.lo_f64(),
            BoundKind::Upper => self.value.hi_f64(),
        }
    }

    pub fn is_heuristic(&self) -> bool {
        self.provenance == Provenance::Heuristic
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 || self.n > self.d {
            return Err(Error::domain(format!(
                "certificate {}: need 1 ≤ n ≤ d",
                self.id
            )));
        }
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id.starts_with('.') {
            return Err(Error::domain(format!(
                "invalid certificate id `{}`",
                self.id
            )));
        }
        if let BoundValue::Interval(lo, hi) = self.value {
            if !(lo <= hi) {
                return Err(Error::domain(format!(
                    "certificate {}: empty interval",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

fn data_entry(
    id: &str,
    d: usize,
    n: usize,
    kind: BoundKind,
    value: BoundValue,
    provenance: Provenance,
    source: &str,
    witness: Value,
) -> BoundCertificate {
    BoundCertificate {
        id: id.into(),
        d,
        n,
        kind,
        value,
        provenance,
        source: source.into(),
        witness,
        chain: Vec::new(),
    }
}

/// Constants proved elsewhere.
pub fn literature_entries() -> Vec<BoundCertificate> {
    use BoundKind::*;
    let sqrt2 = BoundValue::Exact(ExactScalar::sqrt_int(2));
    vec![
        data_entry(
            "lit-krivine-kg2-lower",
            2,
            1,
            Lower,
            sqrt2.clone(),
            Provenance::Literature,
            "Krivine 1979",
            json!(null),
        ),
        data_entry(
            "lit-krivine-kg2-upper",
            2,
            1,
            Upper,
            sqrt2,
            Provenance::Literature,
            "Krivine 1979",
            json!(null),
        ),
        data_entry(
            "lit-kg9-lower",
            9,
            1,
            Lower,
            BoundValue::Float(1.48608),
            Provenance::Literature,
            "Briët, Buhrman, Toner 2011",
            json!(null),
        ),
        data_entry(
            "lit-kg3-upper",
            3,
            1,
            Upper,
            BoundValue::Float(1.455),
            Provenance::Literature,
            "Designolle et al. 2023",
            json!(null),
        ),
    ]
}

fn exact_value(terms: &[(i64, i64, u64)], den: i64) -> ExactScalar {
    let mut v = ExactScalar::zero();
    for &(num, mult, rad) in terms {
        v += &(&ExactScalar::from_int(num * mult) * &ExactScalar::sqrt_int(rad));
    }
    v.checked_div(&ExactScalar::from_int(den))
        .expect("non-zero denominator")
}

/// Published results that are too large to recompute here. The heuristic
/// ones keep their heuristic provenance.
pub fn reported_entries() -> Vec<BoundCertificate> {
    use BoundKind::Lower;
    let mut out = Vec::new();
    for (d, m1, m2, v) in [
        (3, 97, 97, 1.43670),
        (4, 60, 360, 1.48579),
        (5, 65, 385, 1.49339),
    ] {
        out.push(data_entry(
            &format!("reported-kg{d}-{m1}x{m2}"),
            d,
            1,
            Lower,
            BoundValue::Float(v),
            Provenance::Reported,
            "separation of mixed packings, exact SDP_1",
            json!({ "m1": m1, "m2": m2 }),
        ));
    }
    for (d, m, v) in [(4, 300, 1.49956), (7, 91, 1.49967), (8, 120, 1.51376)] {
        out.push(data_entry(
            &format!("reported-kg{d}-{m}x{m}-heuristic"),
            d,
            1,
            Lower,
            BoundValue::Float(v),
            Provenance::Heuristic,
            "separation with heuristic SDP_1",
            json!({ "m1": m, "m2": m }),
        ));
    }
    out.push(data_entry(
        "reported-e7-facet",
        7,
        1,
        Lower,
        BoundValue::Exact(exact_value(&[(2961, 1, 1)], 1991)),
        Provenance::Reported,
        "E7 diagonal modification, λ = 7/6",
        json!({ "config": "e7", "lambda": "7/6" }),
    ));
    out.push(data_entry(
        "reported-e8-facet",
        8,
        1,
        Lower,
        BoundValue::Exact(exact_value(&[(165, 1, 1)], 109)),
        Provenance::Heuristic,
        "E8 diagonal modification, λ = 13/6",
        json!({ "config": "e8", "lambda": "13/6" }),
    ));
    out.push(data_entry(
        "reported-e7-etf-facet",
        7,
        1,
        Lower,
        BoundValue::Exact(exact_value(&[(24631, 1, 1), (18216, 1, 3)], 37463)),
        Provenance::Heuristic,
        "E7 plus ETF facet",
        json!({ "config": "e7-etf" }),
    ));
    // 3(α + β√5)/γ with the 120-cell constants.
    let alpha = ExactScalar::from_rational(big("2566372165103191"));
    let beta = ExactScalar::from_rational(big("1178280120531798"));
    let gam = ExactScalar::from_rational(big("10405220765436757"));
    let v = (&ExactScalar::from_int(3) * &(&alpha + &(&beta * &ExactScalar::sqrt_int(5))))
        .checked_div(&gam)
        .expect("non-zero");
    out.push(data_entry(
        "reported-120cell-facet",
        4,
        1,
        Lower,
        BoundValue::Exact(v),
        Provenance::Heuristic,
        "120-cell facet",
        json!({ "config": "120-cell" }),
    ));
    out
}

fn big(s: &str) -> num_rational::BigRational {
    num_rational::BigRational::from_integer(s.parse().expect("integer literal"))
}

/// Best lower bound on `K_G(d→n)` from the store, closed forms and
/// literature, with monotonicity in `d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BestKnown {
    pub d: usize,
    pub n: usize,
    pub value: f64,
    pub display: String,
    pub provenance: Provenance,
    /// Certificate id, or `gamma-ratio` for the closed form.
    pub source: String,
    /// Order of the certificate the value was propagated from.
    pub from_d: usize,
    pub chain: Vec<String>,
}

/// One line of a report table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub d: usize,
    pub n: usize,
    pub value: f64,
    pub display: String,
    pub provenance: Provenance,
    pub certificate: String,
    pub from_d: usize,
    /// Closed-form bound the row improves on.
    pub closed_form: f64,
    pub asterisk: bool,
}

/// Append-only directory of certificate files.
#[derive(Clone, Debug)]
pub struct CertificateStore {
    dir: PathBuf,
}

impl CertificateStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Writes a new certificate. Re-adding an identical certificate is a
    /// no-op; a different one under an existing id is refused.
    pub fn append(&self, cert: &BoundCertificate) -> Result<PathBuf> {
        cert.validate()?;
        let path = self.path_of(&cert.id);
        let text = cert.to_json()? + "\n";
        if path.exists() {
            let old = BoundCertificate::from_json(&fs::read_to_string(&path)?)?;
            if &old == cert {
                return Ok(path);
            }
            return Err(Error::domain(format!(
                "certificate `{}` already exists",
                cert.id
            )));
        }
        // Write aside, then publish with a create-new link so readers only
        // ever see complete files and concurrent writers cannot clobber.
        let tmp = self.dir.join(format!(".{}.tmp", cert.id));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        let linked = fs::hard_link(&tmp, &path);
        let _ = fs::remove_file(&tmp);
        match linked {
            Ok(()) => Ok(path),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::domain(format!(
                "certificate `{}` already exists",
                cert.id
            ))),
            Err(e) => Err(e.into()),
        }
    }

    pub fn append_all(&self, certs: &[BoundCertificate]) -> Result<()> {
        for c in certs {
            self.append(c)?;
        }
        Ok(())
    }

    /// All certificates, sorted by id.
    pub fn snapshot(&self) -> Result<Vec<BoundCertificate>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
            if name.starts_with('.') || path.extension().and_then(|s| s.to_str()) != Some("json") {
                continue;
            }
            out.push(BoundCertificate::from_json(&fs::read_to_string(&path)?)?);
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    pub fn get(&self, id: &str) -> Result<BoundCertificate> {
        let path = self.path_of(id);
        if !path.exists() {
            return Err(Error::domain(format!("no certificate `{id}`")));
        }
        BoundCertificate::from_json(&fs::read_to_string(path)?)
    }

    pub fn best_known(
        &self,
        d: usize,
        n: usize,
        include_heuristic: bool,
    ) -> Result<Option<BestKnown>> {
        Ok(best_known(&self.snapshot()?, d, n, include_heuristic))
    }

    pub fn report(&self, n: usize) -> Result<Vec<ReportRow>> {
        Ok(report_rows(&self.snapshot()?, n))
    }
}

fn best_certificate<'a>(
    certs: &'a [BoundCertificate],
    d: usize,
    n: usize,
    include_heuristic: bool,
) -> Option<&'a BoundCertificate> {
    certs
        .iter()
        .filter(|c| c.kind == BoundKind::Lower && c.n == n && c.d <= d)
        .filter(|c| include_heuristic || !c.is_heuristic())
        .max_by(|a, b| {
            a.conservative_f64()
                .total_cmp(&b.conservative_f64())
                // Prefer the smaller order: it propagates further.
                .then(b.d.cmp(&a.d))
                .then(b.id.cmp(&a.id))
        })
}

fn closed_form_lower(d: usize, n: usize) -> Option<(f64, String)> {
    let g = gamma_ratio(d, n).ok()?;
    Some((interval_lo_f64(&g.interval()), g.to_string()))
}

/// Best lower bound on `K_G(d→n)`. Certificates of order `d' ≤ d` count by
/// monotonicity; the closed form `γ(d)/γ(n)` and literature data compete.
pub fn best_known(
    certs: &[BoundCertificate],
    d: usize,
    n: usize,
    include_heuristic: bool,
) -> Option<BestKnown> {
    if n == 0 || n > d {
        return None;
    }
    let lit = literature_entries();
    let pool: Vec<BoundCertificate> = certs
        .iter()
        .cloned()
        .chain(
            lit.into_iter()
                .filter(|l| !certs.iter().any(|c| c.id == l.id)),
        )
        .collect();
    let mut best = closed_form_lower(d, n).map(|(v, s)| BestKnown {
        d,
        n,
        value: v,
        display: s,
        provenance: Provenance::ClosedForm,
        source: "gamma-ratio".into(),
        from_d: d,
        chain: Vec::new(),
    });
    if let Some(c) = best_certificate(&pool, d, n, include_heuristic) {
        let v = c.conservative_f64();
        if best.as_ref().is_none_or(|b| v > b.value) {
            let mut chain = vec![c.id.clone()];
            chain.extend(c.chain.iter().cloned());
            best = Some(BestKnown {
                d,
                n,
                value: v,
                display: c.value.display(),
                provenance: c.provenance,
                source: c.id.clone(),
                from_d: c.d,
                chain,
            });
        }
    }
    best
}

/// Rows where a stored certificate beats the closed form `γ(d)/γ(n)`.
/// Heuristic certificates produce separate rows marked with an asterisk.
pub fn report_rows(certs: &[BoundCertificate], n: usize) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for d in n.max(1)..=MAX_REPORT_ORDER {
        let Some((cf, _)) = closed_form_lower(d, n) else {
            continue;
        };
        let proved = best_certificate(certs, d, n, false);
        let mut push = |c: &BoundCertificate, asterisk: bool| {
            rows.push(ReportRow {
                d,
                n,
                value: c.conservative_f64(),
                display: c.value.display(),
                provenance: c.provenance,
                certificate: c.id.clone(),
                from_d: c.d,
                closed_form: cf,
                asterisk,
            })
        };
        if let Some(c) = proved.filter(|c| c.conservative_f64() > cf) {
            push(c, false);
        }
        let floor = proved.map_or(cf, |c| c.conservative_f64().max(cf));
        let heur = certs
            .iter()
            .filter(|c| c.kind == BoundKind::Lower && c.n == n && c.d <= d && c.is_heuristic())
            .max_by(|a, b| {
                a.conservative_f64()
                    .total_cmp(&b.conservative_f64())
                    .then(b.d.cmp(&a.d))
            });
        if let Some(c) = heur.filter(|c| c.conservative_f64() > floor) {
            push(c, true);
        }
    }
    rows
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s =
        String::from("d,n,value,exact,provenance,certificate,from_d,closed_form,asterisk\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.9},\"{}\",{},{},{},{:.9},{}",
            r.d,
            r.n,
            r.value,
            r.display,
            r.provenance.as_str(),
            r.certificate,
            r.from_d,
            r.closed_form,
            if r.asterisk { "*" } else { "" }
        );
    }
    s
}

pub fn report_text(rows: &[ReportRow]) -> String {
    if rows.is_empty() {
        return "warning: no certificate improves on the closed-form bounds\n".into();
    }
    let mut s = format!(
        "{:>3} {:>2}  {:<14} {:<28} {:<12} {:<6} {}\n",
        "d", "n", "bound", "value", "provenance", "from", "certificate"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>3} {:>2}  {:<14} {:<28} {:<12} {:<6} {}",
            r.d,
            r.n,
            format!("{:.5}{}", r.value, if r.asterisk { "*" } else { "" }),
            r.display,
            r.provenance.as_str(),
            format!("d={}", r.from_d),
            r.certificate
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert(id: &str, d: usize, v: BoundValue, p: Provenance) -> BoundCertificate {
        data_entry(id, d, 1, BoundKind::Lower, v, p, "test", json!(null))
    }

    #[test]
    fn hexagon_only_report() {
        let c = cert(
            "hex",
            2,
            BoundValue::Exact(ExactScalar::from_ratio(5, 4)),
            Provenance::Exact,
        );
        let rows = report_rows(&[c], 1);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].d, 2);
        assert_eq!(rows[0].display, "5/4");
    }

    #[test]
    fn propagation_to_d9() {
        let rows = report_rows(&reported_entries(), 1);
        let proved: Vec<usize> = rows
            .iter()
            .filter(|r| r.certificate == "reported-kg5-65x385")
            .map(|r| r.d)
            .collect();
        assert_eq!(proved, vec![5, 6, 7, 8, 9]);
        assert!(rows.iter().any(|r| r.asterisk && r.d == 8));
        let b9 = best_known(&reported_entries(), 9, 1, false).unwrap();
        assert!((b9.value - 1.49339).abs() < 1e-12);
        let b2 = best_known(&[], 2, 1, false).unwrap();
        assert_eq!(b2.source, "lit-krivine-kg2-lower");
    }

    #[test]
    fn best_known_monotone() {
        let certs = reported_entries();
        let mut prev = 0.0;
        for d in 1..=MAX_REPORT_ORDER {
            let v = best_known(&certs, d, 1, false).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn store_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let s = CertificateStore::open(dir.path()).unwrap();
        let c = cert(
            "hex",
            2,
            BoundValue::Exact(ExactScalar::from_ratio(5, 4)),
            Provenance::Exact,
        );
        s.append(&c).unwrap();
        s.append(&c).unwrap();
        let mut other = c.clone();
        other.value = BoundValue::Float(1.0);
        assert!(s.append(&other).is_err());
        assert_eq!(s.snapshot().unwrap(), vec![c]);
        assert!(report_text(&[]).starts_with("warning"));
    }

    #[test]
    fn heuristic_entries_stay_heuristic() {
        for c in reported_entries() {
            if c.id.contains("heuristic")
                || c.id.contains("e8")
                || c.id.contains("120")
                || c.id.contains("etf")
            {
                assert_eq!(c.provenance, Provenance::Heuristic, "{}", c.id);
            }
        }
        let e = reported_entries()
            .into_iter()
            .find(|c| c.id == "reported-120cell-facet")
            .unwrap();
        assert!((e.value_f64() - 1.4996).abs() < 1e-4);
    }
}
