use std::collections::BTreeSet;

use serde::Serialize;

use super::{Configuration, Line, Tag};
use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::geometry;

/// One row of the built-in catalog.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub aliases: &'static [&'static str],
    pub d: usize,
    pub m: usize,
    pub group: &'static str,
    pub kissing: bool,
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        id: "hexagon",
        aliases: &["A2"],
        d: 2,
        m: 3,
        group: "A2",
        kissing: true,
    },
    CatalogEntry {
        id: "icosahedron",
        aliases: &[],
        d: 3,
        m: 6,
        group: "H3",
        kissing: true,
    },
    CatalogEntry {
        id: "cuboctahedron",
        aliases: &["A3", "A3-cuboctahedron", "D3"],
        d: 3,
        m: 6,
        group: "A3",
        kissing: true,
    },
    CatalogEntry {
        id: "dodecahedron",
        aliases: &[],
        d: 3,
        m: 10,
        group: "H3",
        kissing: false,
    },
    CatalogEntry {
        id: "icosidodecahedron",
        aliases: &[],
        d: 3,
        m: 15,
        group: "H3",
        kissing: false,
    },
    CatalogEntry {
        id: "24cell",
        aliases: &["D4"],
        d: 4,
        m: 12,
        group: "D4",
        kissing: true,
    },
    CatalogEntry {
        id: "600cell",
        aliases: &[],
        d: 4,
        m: 60,
        group: "H4",
        kissing: false,
    },
    CatalogEntry {
        id: "120cell",
        aliases: &[],
        d: 4,
        m: 300,
        group: "H4",
        kissing: false,
    },
    CatalogEntry {
        id: "D5",
        aliases: &[],
        d: 5,
        m: 20,
        group: "D5",
        kissing: true,
    },
    CatalogEntry {
        id: "D6",
        aliases: &[],
        d: 6,
        m: 30,
        group: "D6",
        kissing: false,
    },
    CatalogEntry {
        id: "E6",
        aliases: &[],
        d: 6,
        m: 36,
        group: "E6",
        kissing: true,
    },
    CatalogEntry {
        id: "ETF-28",
        aliases: &["ETF-28-d7", "ETF"],
        d: 7,
        m: 28,
        group: "E7",
        kissing: false,
    },
    CatalogEntry {
        id: "D7",
        aliases: &[],
        d: 7,
        m: 42,
        group: "D7",
        kissing: false,
    },
    CatalogEntry {
        id: "E7",
        aliases: &[],
        d: 7,
        m: 63,
        group: "E7",
        kissing: true,
    },
    CatalogEntry {
        id: "E7+ETF-91",
        aliases: &["E7+ETF"],
        d: 7,
        m: 91,
        group: "E7",
        kissing: false,
    },
    CatalogEntry {
        id: "D8",
        aliases: &[],
        d: 8,
        m: 56,
        group: "D8",
        kissing: false,
    },
    CatalogEntry {
        id: "E8",
        aliases: &[],
        d: 8,
        m: 120,
        group: "E8",
        kissing: true,
    },
];

/// The configurations listed in the main results table, in table order.
pub fn catalog() -> &'static [CatalogEntry] {
    ENTRIES
}

fn int(n: i64) -> ExactScalar {
    ExactScalar::from_int(n)
}

fn half(n: i64) -> ExactScalar {
    ExactScalar::from_ratio(n, 2)
}

fn phi() -> ExactScalar {
    &half(1) + &ExactScalar::sqrt_int(5).scale(&crate::exact::ratio(1, 2))
}

fn phi_inv() -> ExactScalar {
    &phi() - &int(1)
}

/// Builds a configuration by name. Accepts the catalog ids and aliases, `D3`
/// to `D8`, and the compound `600cell+120cell`.
pub fn generate(name: &str) -> Result<Configuration> {
    let key = name.trim();
    let canonical = ENTRIES
        .iter()
        .find(|e| {
            e.id.eq_ignore_ascii_case(key) || e.aliases.iter().any(|a| a.eq_ignore_ascii_case(key))
        })
        .map(|e| e.id);
    let conf = match canonical.unwrap_or(key) {
        "hexagon" => hexagon()?,
        "cuboctahedron" => d_family(3)?.renamed("cuboctahedron"),
        "icosahedron" => icosahedron()?,
        "dodecahedron" => dodecahedron()?,
        "icosidodecahedron" => icosidodecahedron()?,
        "24cell" => d_family(4)?.renamed("24cell").with_tags(&[Tag::Platonic]),
        "600cell" => cell600()?,
        "120cell" => cell120()?,
        "D5" => d_family(5)?,
        "D6" => d_family(6)?,
        "D7" => d_family(7)?,
        "D8" => d_family(8)?,
        "E6" => e6()?,
        "E7" => e7()?,
        "E8" => e8()?,
        "ETF-28" => etf28()?,
        "E7+ETF-91" => {
            let e7 = e7()?;
            let mut c = e7.union(&etf28()?, "E7+ETF-91")?;
            c.tags.clear();
            c
        }
        "600cell+120cell" => {
            let mut c = cell600()?.union(&cell120()?, "600cell+120cell")?;
            c.tags.clear();
            c
        }
        other => match other
            .strip_prefix('D')
            .and_then(|s| s.parse::<usize>().ok())
        {
            Some(n) if (3..=8).contains(&n) => d_family(n)?,
            _ => return Err(Error::Catalog(name.to_string())),
        },
    };
    if let Some(e) = ENTRIES.iter().find(|e| e.id == conf.name) {
        if e.kissing {
            return Ok(conf.with_tags(&[Tag::Kissing]));
        }
    }
    Ok(conf)
}

impl Configuration {
    fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

/// Distinct lines spanned by `vectors`, in order of first appearance, using
/// the representative whose first non-zero coordinate is positive.
fn lines_of(vectors: impl IntoIterator<Item = Vec<ExactScalar>>) -> Result<Vec<Line>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in vectors {
        let l = Line::new(v)?.canonical();
        if seen.insert(l.coords().to_vec()) {
            out.push(l);
        }
    }
    Ok(out)
}

/// Every vector obtained from `v` by flipping signs of its non-zero entries.
fn sign_orbit(v: &[ExactScalar]) -> Vec<Vec<ExactScalar>> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
    (0..1u32 << nz.len())
        .map(|mask| {
            let mut w = v.to_vec();
            for (bit, &i) in nz.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    w[i] = -&w[i];
                }
            }
            w
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn parity(p: &[usize]) -> bool {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 0
}

#[derive(Clone, Copy)]
enum Perms {
    All,
    Even,
    Odd,
    Cyclic,
}

fn permuted(v: &[ExactScalar], which: Perms) -> Vec<Vec<ExactScalar>> {
    let n = v.len();
    let perms: Vec<Vec<usize>> = match which {
        Perms::Cyclic => (0..n)
            .map(|s| (0..n).map(|i| (i + s) % n).collect())
            .collect(),
        Perms::All => permutations(n),
        Perms::Even => permutations(n).into_iter().filter(|p| parity(p)).collect(),
        Perms::Odd => permutations(n).into_iter().filter(|p| !parity(p)).collect(),
    };
    perms
        .iter()
        .map(|p| p.iter().map(|&i| v[i].clone()).collect())
        .collect()
}

fn orbit(v: &[ExactScalar], which: Perms) -> Vec<Vec<ExactScalar>> {
    permuted(v, which)
        .iter()
        .flat_map(|w| sign_orbit(w))
        .collect()
}

fn hexagon() -> Result<Configuration> {
    let r3 = ExactScalar::sqrt_int(3).scale(&crate::exact::ratio(1, 2));
    let lines = vec![
        Line::new(vec![int(1), int(0)])?,
        Line::new(vec![half(1), r3.clone()])?,
        Line::new(vec![half(-1), r3])?,
    ];
    let mirrors = lines.clone();
    Ok(Configuration::new("hexagon", 2, lines, true)?.with_mirrors(mirrors))
}

/// Roots `e_i ± e_j` of `D_n`, one per line.
fn d_roots(n: usize) -> Vec<Vec<ExactScalar>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for s in [1, -1] {
                let mut v = vec![int(0); n];
                v[i] = int(1);
                v[j] = int(s);
                out.push(v);
            }
        }
    }
    out
}

fn d_family(n: usize) -> Result<Configuration> {
    let lines = lines_of(d_roots(n))?;
    let mirrors = lines.clone();
    Ok(Configuration::new(format!("D{n}"), n, lines, true)?.with_mirrors(mirrors))
}

/// The 240 roots of `E8` in the even coordinate system.
fn e8_roots() -> Vec<Vec<ExactScalar>> {
    let mut out: Vec<Vec<ExactScalar>> = d_roots(8).iter().flat_map(|v| sign_orbit(v)).collect();
    for mask in 0..256u32 {
        if mask.count_ones() % 2 == 0 {
            out.push(
                (0..8)
                    .map(|i| half(if mask >> i & 1 == 1 { -1 } else { 1 }))
                    .collect(),
            );
        }
    }
    out
}

fn e8() -> Result<Configuration> {
    let lines = lines_of(e8_roots())?;
    let mirrors = lines.clone();
    Ok(Configuration::new("E8", 8, lines, true)?.with_mirrors(mirrors))
}

/// Orthonormal coordinates on the hyperplane `x7 + x8 = 0`.
fn to_e7_frame(v: &[ExactScalar]) -> Vec<ExactScalar> {
    let inv_r2 = ExactScalar::sqrt_int(2).scale(&crate::exact::ratio(1, 2));
    let mut w: Vec<ExactScalar> = v[..6].to_vec();
    w.push(&(&v[6] - &v[7]) * &inv_r2);
    w
}

fn e7_vectors() -> Vec<Vec<ExactScalar>> {
    e8_roots()
        .into_iter()
        .filter(|v| (&v[6] + &v[7]).is_zero())
        .map(|v| to_e7_frame(&v))
        .collect()
}

fn e7() -> Result<Configuration> {
    let lines = lines_of(e7_vectors())?;
    let mirrors = lines.clone();
    Ok(Configuration::new("E7", 7, lines, true)?.with_mirrors(mirrors))
}

/// The 28 equiangular lines in `R^7`: projections of the `E8` roots with
/// `⟨s, e7 + e8⟩ = 1` onto the `E7` hyperplane.
fn etf28() -> Result<Configuration> {
    let vectors = e8_roots()
        .into_iter()
        .filter(|v| (&v[6] + &v[7]) == int(1))
        .map(|v| {
            let mut p = v.clone();
            p[6] = &p[6] - &half(1);
            p[7] = &p[7] - &half(1);
            to_e7_frame(&p)
        });
    let lines = lines_of(vectors)?;
    let mirrors = lines_of(e7_vectors())?;
    Ok(Configuration::new("ETF-28", 7, lines, true)?
        .with_tags(&[Tag::Etf])
        .with_mirrors(mirrors))
}

fn e6() -> Result<Configuration> {
    let inv_r3 = ExactScalar::sqrt_int(3).scale(&crate::exact::ratio(1, 3));
    let vectors = e8_roots()
        .into_iter()
        .filter(|v| v[5] == v[6] && v[6] == -&v[7])
        .map(|v| {
            let mut w: Vec<ExactScalar> = v[..5].to_vec();
            w.push(&(&(&v[5] + &v[6]) - &v[7]) * &inv_r3);
            w
        });
    let lines = lines_of(vectors)?;
    let mirrors = lines.clone();
    Ok(Configuration::new("E6", 6, lines, true)?.with_mirrors(mirrors))
}

fn h3_mirrors() -> Result<Vec<Line>> {
    Ok(icosidodecahedron()?.lines().to_vec())
}

fn icosahedron() -> Result<Configuration> {
    let lines = lines_of(orbit(&[int(0), phi(), int(1)], Perms::Cyclic))?;
    Ok(Configuration::new("icosahedron", 3, lines, true)?
        .with_tags(&[Tag::Etf, Tag::Platonic])
        .with_mirrors(h3_mirrors()?))
}

fn dodecahedron() -> Result<Configuration> {
    let mut vectors = orbit(&[int(1), int(1), int(1)], Perms::Cyclic);
    vectors.extend(orbit(&[int(0), phi_inv(), phi()], Perms::Cyclic));
    let lines = lines_of(vectors)?;
    Ok(Configuration::new("dodecahedron", 3, lines, true)?
        .with_tags(&[Tag::Platonic])
        .with_mirrors(h3_mirrors()?))
}

fn icosidodecahedron() -> Result<Configuration> {
    let mut vectors = orbit(&[int(0), int(0), int(1)], Perms::Cyclic);
    let h = crate::exact::ratio(1, 2);
    vectors.extend(orbit(
        &[phi_inv().scale(&h), half(1), phi().scale(&h)],
        Perms::Cyclic,
    ));
    let lines = lines_of(vectors)?;
    let mirrors = lines.clone();
    Ok(Configuration::new("icosidodecahedron", 3, lines, true)?.with_mirrors(mirrors))
}

fn cell600_lines() -> Result<Vec<Line>> {
    let mut vectors = orbit(&[int(1), int(0), int(0), int(0)], Perms::All);
    vectors.extend(sign_orbit(&[half(1), half(1), half(1), half(1)]));
    let h = crate::exact::ratio(1, 2);
    vectors.extend(orbit(
        &[phi().scale(&h), half(1), phi_inv().scale(&h), int(0)],
        Perms::Even,
    ));
    lines_of(vectors)
}

fn cell600() -> Result<Configuration> {
    let lines = cell600_lines()?;
    let mirrors = lines.clone();
    Ok(Configuration::new("600cell", 4, lines, true)?
        .with_tags(&[Tag::Platonic])
        .with_mirrors(mirrors))
}

/// Vertices of the 120-cell dual to [`cell600`], radius `√8`.
fn cell120() -> Result<Configuration> {
    let r5 = ExactScalar::sqrt_int(5);
    let p = phi();
    let pi = phi_inv();
    let p2 = &p * &p;
    let pi2 = &pi * &pi;
    let mut vectors = orbit(&[int(0), int(0), int(2), int(2)], Perms::All);
    vectors.extend(orbit(&[int(1), int(1), int(1), r5.clone()], Perms::All));
    vectors.extend(orbit(
        &[pi2.clone(), p.clone(), p.clone(), p.clone()],
        Perms::All,
    ));
    vectors.extend(orbit(
        &[pi.clone(), pi.clone(), pi.clone(), p2.clone()],
        Perms::All,
    ));
    vectors.extend(orbit(&[int(0), pi2, int(1), p2], Perms::Odd));
    vectors.extend(orbit(&[int(0), pi.clone(), p.clone(), r5], Perms::Odd));
    vectors.extend(orbit(&[pi, int(1), p, int(2)], Perms::Odd));
    let lines = lines_of(vectors)?;
    Ok(Configuration::new("120cell", 4, lines, true)?
        .with_tags(&[Tag::Platonic])
        .with_mirrors(cell600_lines()?))
}

/// Icosahedron refined `level` times by adding the normalised centre of
/// every triangular facet of the current convex hull.
///
/// The refined point sets are float-backed.
pub fn refined_icosahedron(level: usize) -> Result<Configuration> {
    let base = icosahedron()?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    for l in base.lines() {
        let u = l.unit_f64();
        points.push(u.iter().map(|x| -x).collect());
        points.push(u);
    }
    for _ in 0..level {
        let hull = geometry::hull_3d(&points)?;
        let mut next = points.clone();
        for tri in hull.triangles() {
            let mut c = [0.0; 3];
            for &i in &tri {
                for k in 0..3 {
                    c[k] += points[i][k];
                }
            }
            let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            next.push(c.iter().map(|x| x / n).collect());
        }
        points = next;
    }
    let lines = super::packing::float_lines(&points, 3)?;
    Ok(
        Configuration::new(format!("icosahedron-refined-{level}"), 3, lines, false)?
            .with_mirrors(h3_mirrors()?),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_sizes_match_table() {
        for e in catalog() {
            let c = generate(e.id).unwrap();
            assert_eq!((c.d, c.m()), (e.d, e.m), "{}", e.id);
        }
        assert_eq!(catalog().len(), 17);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(generate("F4"), Err(Error::Catalog(_))));
    }

    #[test]
    fn compound_is_360() {
        assert_eq!(generate("600cell+120cell").unwrap().m(), 360);
    }
}
