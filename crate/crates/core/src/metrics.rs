//! Disclosure tone, firm washing index and peer washing index.
//!
//! All functions are pure; panel functions return fresh maps instead of
//! mutating their input so one panel can be rescored under another industry
//! partition.

use std::collections::{BTreeMap, HashMap};

use crate::error::MetricsError;

/// Classified AI statement counts for one firm-period.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct DisclosureRecord {
    pub n_descriptive: u32,
    pub n_substantive: u32,
}

impl DisclosureRecord {
    pub fn new(n_descriptive: u32, n_substantive: u32) -> Self {
        Self { n_descriptive, n_substantive }
    }

    pub fn n_total(&self) -> u32 {
        self.n_descriptive + self.n_substantive
    }
}

/// Share of descriptive statements. Zero when nothing was disclosed.
pub fn ai_tone(d: &DisclosureRecord) -> f64 {
    let total = d.n_total();
    if total == 0 {
        0.0
    } else {
        f64::from(d.n_descriptive) / f64::from(total)
    }
}

/// `ln(1 + tone * total)`: disclosure tone scaled by disclosure volume.
///
/// The product collapses to the descriptive count, so this equals
/// `ln(1 + n_descriptive)` up to rounding.
pub fn washing_index(d: &DisclosureRecord) -> f64 {
    (ai_tone(d) * f64::from(d.n_total())).ln_1p()
}

/// Mean washing index of the focal firm's industry peers, focal excluded.
pub fn peer_washing_index<K, I>(
    indices: &HashMap<K, f64>,
    industry: &HashMap<K, I>,
    focal: &K,
) -> Result<f64, MetricsError>
where
    K: std::hash::Hash + Eq + std::fmt::Debug,
    I: PartialEq + std::fmt::Debug,
{
    let focal_industry = industry
        .get(focal)
        .ok_or_else(|| MetricsError::UnknownFirm(format!("{focal:?}")))?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (id, v) in indices {
        if id == focal {
            continue;
        }
        if industry.get(id) == Some(focal_industry) {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::NoPeers(format!("firm {focal:?} in industry {focal_industry:?}")));
    }
    Ok(sum / n as f64)
}

/// One firm-period observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelCell {
    pub firm_id: u32,
    pub industry_id: u32,
    pub period: u32,
    pub disclosure: DisclosureRecord,
    pub washing_index: f64,
    pub green_output: u64,
}

impl PanelCell {
    /// Builds a cell with its washing index computed from the disclosure.
    pub fn scored(firm_id: u32, industry_id: u32, period: u32, disclosure: DisclosureRecord, green_output: u64) -> Self {
        Self {
            firm_id,
            industry_id,
            period,
            disclosure,
            washing_index: washing_index(&disclosure),
            green_output,
        }
    }
}

/// Peer washing index for every (firm, period) in the panel.
///
/// Groups by (industry, period); each group needs at least two firms.
pub fn panel_peer_indices(panel: &[PanelCell]) -> Result<BTreeMap<(u32, u32), f64>, MetricsError> {
    let mut groups: BTreeMap<(u32, u32), (f64, usize)> = BTreeMap::new();
    for c in panel {
        let g = groups.entry((c.industry_id, c.period)).or_insert((0.0, 0));
        g.0 += c.washing_index;
        g.1 += 1;
    }
    let mut out = BTreeMap::new();
    for c in panel {
        let (sum, n) = groups[&(c.industry_id, c.period)];
        if n < 2 {
            return Err(MetricsError::NoPeers(format!(
                "industry {} in period {}",
                c.industry_id, c.period
            )));
        }
        out.insert((c.firm_id, c.period), (sum - c.washing_index) / (n - 1) as f64);
    }
    Ok(out)
}

/// Pearson product-moment correlation of two selected series over the panel.
pub fn panel_correlation<FX, FY>(panel: &[PanelCell], x: FX, y: FY) -> Result<f64, MetricsError>
where
    FX: Fn(&PanelCell) -> f64,
    FY: Fn(&PanelCell) -> f64,
{
    let xs: Vec<f64> = panel.iter().map(&x).collect();
    let ys: Vec<f64> = panel.iter().map(&y).collect();
    pearson(&xs, &ys)
}

/// Pearson r of two equal-length series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(MetricsError::TooFewCells(n));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in xs.iter().zip(ys) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // relative guard so constant series with rounding residue still count as degenerate
    let tiny = |s: f64, m: f64| s <= 1e-24 * (1.0 + m * m) * n as f64;
    if tiny(sxx, mx) || tiny(syy, my) {
        return Err(MetricsError::DegenerateSeries);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(a: u32, b: u32) -> DisclosureRecord {
        DisclosureRecord::new(a, b)
    }

    #[test]
    fn tone_examples() {
        assert_eq!(ai_tone(&d(0, 7)), 0.0);
        assert_eq!(ai_tone(&d(10, 0)), 1.0);
        assert!((ai_tone(&d(3, 7)) - 0.3).abs() < 1e-15);
        assert_eq!(ai_tone(&d(0, 0)), 0.0);
    }

    #[test]
    fn index_examples() {
        assert_eq!(washing_index(&d(0, 5)), 0.0);
        assert!((washing_index(&d(5, 5)) - 1.791_759_469_228_055).abs() < 1e-12);
        assert!((washing_index(&d(20, 0)) - 3.044_522_437_723_423).abs() < 1e-12);
        assert_eq!(washing_index(&d(0, 0)), 0.0);
    }

    #[test]
    fn peer_index_examples() {
        let idx: HashMap<_, _> = [("A", 1.0), ("B", 2.0), ("C", 3.0)].into_iter().collect();
        let ind: HashMap<_, _> = [("A", 0), ("B", 0), ("C", 0)].into_iter().collect();
        assert_eq!(peer_washing_index(&idx, &ind, &"A").unwrap(), 2.5);

        let flat: HashMap<_, _> = (0..6).map(|i| (i, 0.7)).collect();
        let one: HashMap<_, _> = (0..6).map(|i| (i, 1u8)).collect();
        assert!((peer_washing_index(&flat, &one, &3).unwrap() - 0.7).abs() < 1e-15);

        let idx: HashMap<_, _> = [("A", 1.0), ("B", 2.0)].into_iter().collect();
        let ind: HashMap<_, _> = [("A", 0), ("B", 1)].into_iter().collect();
        assert!(matches!(
            peer_washing_index(&idx, &ind, &"A"),
            Err(MetricsError::NoPeers(_))
        ));
    }

    fn cell(firm: u32, industry: u32, period: u32, desc: u32) -> PanelCell {
        PanelCell::scored(firm, industry, period, d(desc, 3), 0)
    }

    #[test]
    fn panel_constant_indices() {
        let panel: Vec<_> = (0..2).flat_map(|t| (0..3).map(move |f| cell(f, 0, t, 4))).collect();
        let v = washing_index(&d(4, 3));
        for (_, p) in panel_peer_indices(&panel).unwrap() {
            assert!((p - v).abs() < 1e-15);
        }
    }

    #[test]
    fn panel_self_exclusion() {
        let base: Vec<_> = (0..3).map(|f| cell(f, 0, 0, f + 1)).collect();
        let mut bumped = base.clone();
        bumped[0] = cell(0, 0, 0, 40);
        let a = panel_peer_indices(&base).unwrap();
        let b = panel_peer_indices(&bumped).unwrap();
        assert!((a[&(0, 0)] - b[&(0, 0)]).abs() < 1e-12);
        assert_ne!(a[&(1, 0)], b[&(1, 0)]);
    }

    #[test]
    fn panel_two_industries_of_two() {
        let panel = vec![cell(0, 0, 0, 1), cell(1, 0, 0, 2), cell(2, 1, 0, 5), cell(3, 1, 0, 9)];
        let peers = panel_peer_indices(&panel).unwrap();
        assert!((peers[&(0, 0)] - panel[1].washing_index).abs() < 1e-12);
        assert!((peers[&(1, 0)] - panel[0].washing_index).abs() < 1e-12);
        assert!((peers[&(2, 0)] - panel[3].washing_index).abs() < 1e-12);
        assert!((peers[&(3, 0)] - panel[2].washing_index).abs() < 1e-12);
    }

    #[test]
    fn panel_singleton_group_errors() {
        let panel = vec![cell(0, 0, 0, 1), cell(1, 0, 0, 2), cell(2, 1, 0, 5)];
        let err = panel_peer_indices(&panel).unwrap_err();
        assert!(err.to_string().contains("industry 1 in period 0"));
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let affine: Vec<_> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let neg: Vec<_> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &affine).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-12);
        assert!(matches!(pearson(&x, &[1.0; 4]), Err(MetricsError::DegenerateSeries)));
        assert!(matches!(pearson(&x[..2], &x[..2]), Err(MetricsError::TooFewCells(2))));
    }

    proptest! {
        #[test]
        fn index_identity(desc in 0u32..5000, subst in 0u32..5000) {
            let r = d(desc, subst);
            prop_assert!((washing_index(&r) - f64::from(desc).ln_1p()).abs() < 1e-12);
            let tone = ai_tone(&r);
            prop_assert!((0.0..=1.0).contains(&tone));
        }

        #[test]
        fn index_ignores_substantive(desc in 0u32..500, s1 in 0u32..500, s2 in 0u32..500) {
            prop_assert!((washing_index(&d(desc, s1)) - washing_index(&d(desc, s2))).abs() < 1e-12);
        }

        #[test]
        fn tone_monotone_in_descriptive(desc in 0u32..500, subst in 0u32..500) {
            prop_assert!(ai_tone(&d(desc + 1, subst)) >= ai_tone(&d(desc, subst)));
        }

        #[test]
        fn pearson_symmetric_bounded_affine_invariant(
            pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..40),
            scale in 0.1f64..20.0,
            shift in -10.0f64..10.0,
        ) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(r) = pearson(&xs, &ys) {
                prop_assert!((-1.0..=1.0).contains(&r));
                prop_assert!((pearson(&ys, &xs).unwrap() - r).abs() < 1e-12);
                let xs2: Vec<f64> = xs.iter().map(|v| scale * v + shift).collect();
                prop_assert!((pearson(&xs2, &ys).unwrap() - r).abs() < 1e-9);
            }
        }
    }
}
