//! Closed-form bound evaluators over exact rationals. All dimension-dependent
//! constants are normalized to 1; callers compare ratios and scaling
//! exponents, never absolute values.

use num_rational::Ratio;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::{Error, Result};

pub type Rat = Ratio<i64>;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub id: &'static str,
    pub inputs: Vec<(String, String)>,
    #[serde(serialize_with = "ser_rat")]
    pub value: Rat,
    pub side: Side,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rat(r))
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn named(label: &str, v: Rat) -> (String, String) {
    (label.to_string(), format_rat(&v))
}

fn require_positive(label: &str, v: Rat) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{label} must be positive, got {}", format_rat(&v))))
    }
}

fn require_sorted(axes: &[Rat]) -> Result<()> {
    if axes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("axes must be sorted ascending".into()));
    }
    for (i, a) in axes.iter().enumerate() {
        require_positive(&format!("axis {i}"), *a)?;
    }
    Ok(())
}

fn pow(base: Rat, exp: usize) -> Rat {
    let mut out = Rat::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Upper bound on a linking-type invariant of an L-Lipschitz map from the
/// isoperimetric constant, the volume, and one fiber area (quartic in L) or
/// two fiber areas (degree n+1 in L).
pub fn gromov_bound(iso: Rat, vol: Rat, areas: &[Rat], l: Rat, n: usize) -> Result<BoundReport> {
    require_positive("iso", iso)?;
    require_positive("vol", vol)?;
    require_positive("L", l)?;
    for (i, a) in areas.iter().enumerate() {
        require_positive(&format!("area {i}"), *a)?;
    }
    let (value, exponent) = match areas {
        [a] => (iso * vol / (*a * *a) * pow(l, 4), 4),
        [a1, a2] => (iso * vol / (*a1 * *a2) * pow(l, n + 1), n + 1),
        _ => return Err(Error::InvalidInput("need one or two fiber areas".into())),
    };
    let mut inputs = vec![named("iso", iso), named("vol", vol), named("L", l)];
    for (i, a) in areas.iter().enumerate() {
        inputs.push(named(&format!("area{}", i + 1), *a));
    }
    inputs.push((String::from("L_exponent"), exponent.to_string()));
    Ok(BoundReport { id: "lipschitz-invariant-upper", inputs, value, side: Side::Upper, notes: vec![] })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EllipseInvariant {
    Hopf,
    Linking { k1: usize, k2: usize },
}

/// Upper bound on the extremal invariant of L-Lipschitz maps from the
/// n-ellipse with the given principal axes E_0 <= ... <= E_n.
/// Hopf (n = 3): E_1 E_2^2 E_3 L^4. Linking: E_{k2} (E_1...E_n) L^{n+1}.
pub fn ellipse_bound(axes: &[Rat], invariant: EllipseInvariant, l: Rat) -> Result<BoundReport> {
    require_sorted(axes)?;
    require_positive("L", l)?;
    if axes.len() < 2 {
        return Err(Error::InvalidInput("need axes E_0..E_n with n >= 1".into()));
    }
    let n = axes.len() - 1;
    let (k1, k2) = match invariant {
        EllipseInvariant::Hopf => {
            if n != 3 {
                return Err(Error::InvalidInput(format!(
                    "the quartic invariant needs n = 3 (4 axes), got n = {n}"
                )));
            }
            (2, 2)
        }
        EllipseInvariant::Linking { k1, k2 } => {
            if k1 + k2 != n + 1 || k1 < 2 || k1 > k2 {
                return Err(Error::InvalidInput(format!(
                    "need k1 + k2 = n + 1 and 2 <= k1 <= k2; got k1 = {k1}, k2 = {k2}, n = {n}"
                )));
            }
            (k1, k2)
        }
    };
    let volume: Rat = axes[1..].iter().product();
    let value = axes[k2] * volume * pow(l, n + 1);
    let mut inputs: Vec<(String, String)> =
        axes.iter().enumerate().map(|(i, a)| named(&format!("E_{i}"), *a)).collect();
    inputs.push(named("L", l));
    inputs.push(("k1".into(), k1.to_string()));
    inputs.push(("k2".into(), k2.to_string()));
    Ok(BoundReport { id: "ellipse-invariant-upper", inputs, value, side: Side::Upper, notes: vec![] })
}

/// The isoperimetric profile of the n-ellipse with axes E_1 <= ... <= E_n
/// in dimension k: E_{k+1} + E_{n-k} (up to dimension constants).
pub fn iso_formula(axes: &[Rat], k: usize) -> Result<BoundReport> {
    require_sorted(axes)?;
    let n = axes.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!("k = {k} not in 1..{n}")));
    }
    let value = axes[k] + axes[n - k - 1];
    let inputs: Vec<_> = axes
        .iter()
        .enumerate()
        .map(|(i, a)| named(&format!("E_{}", i + 1), *a))
        .chain([("k".into(), k.to_string())])
        .collect();
    Ok(BoundReport { id: "ellipse-iso-profile", inputs, value, side: Side::Upper, notes: vec![] })
}

/// Lower bound for the (n+1)/k-th power of the k-dilation of any degree-D
/// map between the two ellipses: |D| * Q_{n+1-k} * prod_{i=1..n} Q_i, with
/// Q_i the axis ratios E'_i / E_i. Both axis lists are E_0..E_n.
pub fn kdilation_bound(e_axes: &[Rat], eprime_axes: &[Rat], k: usize, d: i64) -> Result<BoundReport> {
    require_sorted(e_axes)?;
    require_sorted(eprime_axes)?;
    if e_axes.len() != eprime_axes.len() || e_axes.len() < 2 {
        return Err(Error::InvalidInput("axis lists must have equal length n + 1 >= 2".into()));
    }
    let n = e_axes.len() - 1;
    if k == 0 || 2 * k > n + 1 {
        return Err(Error::InvalidInput(format!("k = {k} must satisfy 1 <= k <= (n+1)/2 = {}", (n + 1) / 2)));
    }
    let q: Vec<Rat> = (0..=n).map(|i| eprime_axes[i] / e_axes[i]).collect();
    let value = Rat::from_integer(d.abs()) * q[n + 1 - k] * q[1..=n].iter().product::<Rat>();
    let mut inputs: Vec<_> = (0..=n).map(|i| named(&format!("Q_{i}"), q[i])).collect();
    inputs.push(("D".into(), d.to_string()));
    inputs.push(("k".into(), k.to_string()));
    Ok(BoundReport { id: "k-dilation-lower", inputs, value, side: Side::Lower, notes: vec![] })
}

#[derive(Clone, Debug, Serialize)]
pub struct BadExampleReport {
    pub naive: BoundReport,
    pub improved: BoundReport,
    #[serde(serialize_with = "ser_rat")]
    pub ratio: Rat,
}

/// For a sphere with a thin tube of width w and isoperimetric constant ~A w^2:
/// the generic quartic bound A w^2 L^4 versus the tube-aware (1 + A w^3) L^4,
/// and their ratio A w^2 / (1 + A w^3) (L cancels).
pub fn bad_example_bound(a: Rat, w: Rat, l: Rat) -> Result<BadExampleReport> {
    require_positive("A", a)?;
    require_positive("w", w)?;
    require_positive("L", l)?;
    let mut notes = Vec::new();
    if a < Rat::one() || w > Rat::one() {
        notes.push("outside the intended regime A >= 1 >= w".to_string());
    }
    if a * w * w <= Rat::one() {
        notes.push("A w^2 <= 1: the naive bound is not the binding one here".to_string());
    }
    let l4 = pow(l, 4);
    let naive_v = a * w * w * l4;
    let improved_v = (Rat::one() + a * w * w * w) * l4;
    let inputs = vec![named("A", a), named("w", w), named("L", l)];
    let ratio = naive_v / improved_v;
    Ok(BadExampleReport {
        naive: BoundReport {
            id: "tube-example-naive",
            inputs: inputs.clone(),
            value: naive_v,
            side: Side::Upper,
            notes: notes.clone(),
        },
        improved: BoundReport {
            id: "tube-example-improved",
            inputs,
            value: improved_v,
            side: Side::Upper,
            notes,
        },
        ratio,
    })
}

/// Precomposing the standard quadratic-invariant map with a degree-D
/// self-map built from floor(L/C0)^2 bumps: returns (D, invariant) with
/// invariant = D^2, on the order of L^4.
pub fn hopf_composition(l: Rat, c0: Rat) -> Result<(i64, i64)> {
    require_positive("L", l)?;
    require_positive("C0", c0)?;
    if l <= c0 {
        return Ok((0, 0));
    }
    let d = (l / c0).floor().to_integer().pow(2);
    Ok((d, d * d))
}
