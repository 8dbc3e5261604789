use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{extract_candidates, EventDates, LipEvent, PhenologyError, PhenologyRecord, MAX_TRANSITION_DAYS};
use crate::robust::{huber, HuberParams};
use crate::season::{DayIndex, WinterSeason};
use crate::timeline::WinterTimeline;

/// Calendar day within a winter season, without a year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonthDay {
    pub month: u32,
    pub day: u32,
}

impl MonthDay {
    pub const fn new(month: u32, day: u32) -> Self {
        Self { month, day }
    }
}

impl fmt::Display for MonthDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}-{:02}", self.month, self.day)
    }
}

impl FromStr for MonthDay {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, d) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| format!("expected MM-DD, got {s:?}"))?;
        let month = m.parse().map_err(|_| format!("bad month in {s:?}"))?;
        let day = d.parse().map_err(|_| format!("bad day in {s:?}"))?;
        Ok(Self { month, day })
    }
}

impl Serialize for MonthDay {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MonthDay {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Independent Gaussian priors on the four event dates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorConfig {
    means: [MonthDay; 4],
    sigma_days: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            means: [
                MonthDay::new(12, 31),
                MonthDay::new(1, 3),
                MonthDay::new(4, 27),
                MonthDay::new(4, 30),
            ],
            sigma_days: 30.0,
        }
    }
}

impl PriorConfig {
    /// Means are given in FUS, FUE, BUS, BUE order and must be valid, and
    /// chronological, in every season (so Feb 29 is rejected).
    pub fn new(means: [MonthDay; 4], sigma_days: f64) -> Result<Self, PhenologyError> {
        if !(sigma_days > 0.0 && sigma_days.is_finite()) {
            return Err(PhenologyError::Prior(format!("sigma_days must be positive, got {sigma_days}")));
        }
        let probe = WinterSeason::new(2001)?;
        let mut prev = None;
        for (md, e) in means.iter().zip(LipEvent::ALL) {
            let idx = probe
                .index_of_month_day(md.month, md.day)
                .map_err(|_| PhenologyError::Prior(format!("{e} mean {md} is not a day of every winter")))?;
            if prev.is_some_and(|p| idx < p) {
                return Err(PhenologyError::Prior(format!("{e} mean {md} precedes the previous event")));
            }
            prev = Some(idx);
        }
        Ok(Self { means, sigma_days })
    }

    pub fn means(&self) -> [MonthDay; 4] {
        self.means
    }

    pub fn sigma_days(&self) -> f64 {
        self.sigma_days
    }

    pub fn with_sigma(self, sigma_days: f64) -> Result<Self, PhenologyError> {
        Self::new(self.means, sigma_days)
    }

    pub fn resolve(&self, season: WinterSeason) -> ResolvedPrior {
        let mut means = [0.0; 4];
        for (m, md) in means.iter_mut().zip(self.means) {
            *m = season
                .index_of_month_day(md.month, md.day)
                .expect("validated in PriorConfig::new")
                .0 as f64;
        }
        ResolvedPrior {
            means,
            sigma: self.sigma_days,
        }
    }
}

/// Prior means as day-of-winter indices for one season.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPrior {
    pub means: [f64; 4],
    pub sigma: f64,
}

impl ResolvedPrior {
    fn factor(&self, event: LipEvent, day: DayIndex) -> f64 {
        let d = day.0 as f64 - self.means[event.index()];
        (-(d * d) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub huber: HuberParams,
}

/// Non-frozen percentage of the "U with wings" curve at a fractional day.
/// A zero-length transition is a step taking the post-transition value on
/// the event day itself.
pub fn model_nf_at(t: f64, dates: &EventDates) -> f64 {
    let [fus, fue, bus, bue] = dates.as_array().map(|d| d.0 as f64);
    if t < fus {
        100.0
    } else if t < fue {
        100.0 * (fue - t) / (fue - fus)
    } else if t < bus {
        0.0
    } else if t < bue {
        100.0 * (t - bus) / (bue - bus)
    } else {
        100.0
    }
}

pub fn model_nf(t: DayIndex, dates: &EventDates) -> f64 {
    model_nf_at(t.0 as f64, dates)
}

/// Product of the four unnormalized Gaussian factors.
pub fn prior_weight(dates: &EventDates, prior: &ResolvedPrior) -> f64 {
    LipEvent::ALL
        .iter()
        .map(|&e| prior.factor(e, dates.get(e)))
        .product()
}

/// Robust misfit of the curve against the timeline, divided by the prior.
pub fn fit_loss(tl: &WinterTimeline, dates: &EventDates, prior: &ResolvedPrior, params: HuberParams) -> f64 {
    let sum: f64 = tl
        .points()
        .iter()
        .map(|p| huber(p.nf_percent - model_nf(p.day, dates), params))
        .sum();
    scaled(sum, prior_weight(dates, prior))
}

fn scaled(sum: f64, weight: f64) -> f64 {
    if sum == 0.0 {
        0.0
    } else {
        sum / weight
    }
}

pub fn fit_phenology(tl: &WinterTimeline, cfg: &PriorConfig) -> PhenologyRecord {
    fit_phenology_with(tl, cfg, FitOptions::default())
}

/// Exhaustive search over candidate tuples. When some candidate list is
/// empty, or no tuple satisfies the constraints, the freeze-up and break-up
/// halves are fitted on their own and the record is flagged incomplete.
pub fn fit_phenology_with(tl: &WinterTimeline, cfg: &PriorConfig, opts: FitOptions) -> PhenologyRecord {
    let cands = extract_candidates(tl);
    let prior = cfg.resolve(tl.season);
    let mut rec = PhenologyRecord::empty(&tl.lake_id, tl.season);
    rec.candidates_counts = cands.counts();

    if let Some((dates, loss)) = search_full(tl, &cands, &prior, opts.huber) {
        rec.fus = Some(dates.fus());
        rec.fue = Some(dates.fue());
        rec.bus = Some(dates.bus());
        rec.bue = Some(dates.bue());
        rec.fit_loss = Some(loss);
        return super::derive_durations(rec);
    }

    rec.incomplete = true;
    let freeze_end = cands.bus.first().into_iter().chain(cands.bue.first()).min().copied();
    let break_start = cands.fus.last().into_iter().chain(cands.fue.last()).max().copied();
    let freeze = search_half(tl, Half::Freeze, &cands.fus, &cands.fue, freeze_end, &prior, opts.huber);
    let thaw = search_half(tl, Half::Break, &cands.bus, &cands.bue, break_start, &prior, opts.huber);
    let ordered = match (&freeze, &thaw) {
        (Some(f), Some(b)) => f.last() <= b.first(),
        _ => true,
    };
    if !ordered {
        return rec;
    }
    let mut loss = None;
    if let Some(f) = freeze {
        rec.fus = f.a;
        rec.fue = f.b;
        loss = Some(f.loss);
    }
    if let Some(b) = thaw {
        rec.bus = b.a;
        rec.bue = b.b;
        loss = Some(loss.unwrap_or(0.0) + b.loss);
    }
    rec.fit_loss = loss;
    super::derive_durations(rec)
}

fn search_full(
    tl: &WinterTimeline,
    c: &super::EventCandidates,
    prior: &ResolvedPrior,
    params: HuberParams,
) -> Option<(EventDates, f64)> {
    let mut best: Option<(EventDates, f64)> = None;
    for &fus in &c.fus {
        for &fue in c.fue.iter().filter(|&&d| d >= fus && d.0 - fus.0 <= MAX_TRANSITION_DAYS) {
            for &bus in c.bus.iter().filter(|&&d| d >= fue) {
                for &bue in c.bue.iter().filter(|&&d| d >= bus && d.0 - bus.0 <= MAX_TRANSITION_DAYS) {
                    let dates = EventDates { fus, fue, bus, bue };
                    let loss = fit_loss(tl, &dates, prior, params);
                    if best.is_none_or(|(_, l)| loss < l) {
                        best = Some((dates, loss));
                    }
                }
            }
        }
    }
    best
}

#[derive(Clone, Copy)]
enum Half {
    Freeze,
    Break,
}

struct HalfFit {
    a: Option<DayIndex>,
    b: Option<DayIndex>,
    loss: f64,
}

impl HalfFit {
    fn first(&self) -> DayIndex {
        self.a.or(self.b).expect("half fit has an event")
    }
    fn last(&self) -> DayIndex {
        self.b.or(self.a).expect("half fit has an event")
    }
}

/// One transition fitted alone. Only points on the half's side of the
/// other transition's candidates contribute, and only the events that had
/// candidates enter the prior. A missing list is treated as a step at the
/// other event's day, which is then the only one reported.
fn search_half(
    tl: &WinterTimeline,
    half: Half,
    first: &[DayIndex],
    second: &[DayIndex],
    limit: Option<DayIndex>,
    prior: &ResolvedPrior,
    params: HuberParams,
) -> Option<HalfFit> {
    let (ea, eb) = match half {
        Half::Freeze => (LipEvent::Fus, LipEvent::Fue),
        Half::Break => (LipEvent::Bus, LipEvent::Bue),
    };
    let pts: Vec<_> = tl
        .points()
        .iter()
        .filter(|p| match (half, limit) {
            (_, None) => true,
            (Half::Freeze, Some(l)) => p.day < l,
            (Half::Break, Some(l)) => p.day > l,
        })
        .collect();
    let mut pairs = Vec::new();
    match (first.is_empty(), second.is_empty()) {
        (false, false) => {
            for &a in first {
                for &b in second.iter().filter(|&&b| b >= a && b.0 - a.0 <= MAX_TRANSITION_DAYS) {
                    pairs.push((a, b, Some(a), Some(b)));
                }
            }
        }
        (false, true) => pairs.extend(first.iter().map(|&a| (a, a, Some(a), None))),
        (true, false) => pairs.extend(second.iter().map(|&b| (b, b, None, Some(b)))),
        (true, true) => {}
    }
    let mut best: Option<HalfFit> = None;
    for (a, b, ra, rb) in pairs {
        let (a, b) = (a.0 as f64, b.0 as f64);
        let sum: f64 = pts
            .iter()
            .map(|p| {
                let t = p.day.0 as f64;
                let model = match half {
                    Half::Freeze if t < a => 100.0,
                    Half::Freeze if t < b => 100.0 * (b - t) / (b - a),
                    Half::Freeze => 0.0,
                    Half::Break if t < a => 0.0,
                    Half::Break if t < b => 100.0 * (t - a) / (b - a),
                    Half::Break => 100.0,
                };
                huber(p.nf_percent - model, params)
            })
            .sum();
        let weight = ra.map_or(1.0, |d| prior.factor(ea, d)) * rb.map_or(1.0, |d| prior.factor(eb, d));
        let loss = scaled(sum, weight);
        if best.as_ref().is_none_or(|h| loss < h.loss) {
            best = Some(HalfFit { a: ra, b: rb, loss });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::TimelinePoint;
    use proptest::prelude::*;

    fn d(a: u32, b: u32, c: u32, e: u32) -> EventDates {
        EventDates::new(DayIndex(a), DayIndex(b), DayIndex(c), DayIndex(e)).unwrap()
    }

    fn season() -> WinterSeason {
        WinterSeason::new(2010).unwrap()
    }

    fn timeline(points: impl IntoIterator<Item = (u32, f64)>) -> WinterTimeline {
        let pts = points
            .into_iter()
            .map(|(day, nf)| TimelinePoint {
                day: DayIndex(day),
                nf_percent: nf,
                cloud_free: 1.0,
                n_pixels: 10,
            })
            .collect();
        WinterTimeline::new("sils", season(), pts).unwrap()
    }

    #[test]
    fn model_shape() {
        let x = d(100, 104, 200, 210);
        assert_eq!(model_nf(DayIndex(50), &x), 100.0);
        assert_eq!(model_nf(DayIndex(100), &x), 100.0);
        assert_eq!(model_nf(DayIndex(102), &x), 50.0);
        assert_eq!(model_nf(DayIndex(150), &x), 0.0);
        assert_eq!(model_nf(DayIndex(205), &x), 50.0);
        assert_eq!(model_nf(DayIndex(210), &x), 100.0);
        let step = d(100, 100, 200, 200);
        assert_eq!(model_nf(DayIndex(99), &step), 100.0);
        assert_eq!(model_nf(DayIndex(100), &step), 0.0);
        assert_eq!(model_nf(DayIndex(199), &step), 0.0);
        assert_eq!(model_nf(DayIndex(200), &step), 100.0);
    }

    #[test]
    fn unordered_dates_rejected() {
        assert!(EventDates::new(DayIndex(5), DayIndex(4), DayIndex(6), DayIndex(7)).is_err());
        assert!(EventDates::feasible(DayIndex(0), DayIndex(15), DayIndex(16), DayIndex(17)).is_err());
    }

    #[test]
    fn prior_at_means_and_one_sigma() {
        let p = PriorConfig::default().resolve(season());
        assert_eq!(p.means, [121.0, 124.0, 238.0, 241.0]);
        let at = d(121, 124, 238, 241);
        assert_eq!(prior_weight(&at, &p), 1.0);
        let off = d(121, 124, 238, 271);
        assert!((prior_weight(&off, &p) - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn prior_config_validation() {
        let m = PriorConfig::default().means();
        assert!(PriorConfig::new(m, 0.0).is_err());
        assert!(PriorConfig::new(m, f64::NAN).is_err());
        assert!(PriorConfig::new([m[1], m[0], m[2], m[3]], 30.0).is_err());
        assert!(PriorConfig::new([MonthDay::new(2, 29), m[1], m[2], m[3]], 30.0).is_err());
        assert!(PriorConfig::new([MonthDay::new(7, 1), m[1], m[2], m[3]], 30.0).is_err());
        assert_eq!("12-31".parse::<MonthDay>().unwrap(), MonthDay::new(12, 31));
    }

    #[test]
    fn loss_one_point_off() {
        let p = PriorConfig::default().resolve(season());
        let x = d(121, 124, 238, 241);
        let tl = timeline([(10, 100.0), (150, 1.0), (260, 100.0)]);
        assert_eq!(fit_loss(&tl, &x, &p, HuberParams::default()), 1.0);
        let exact = timeline([(10, 100.0), (150, 0.0), (260, 100.0)]);
        assert_eq!(fit_loss(&exact, &x, &p, HuberParams::default()), 0.0);
    }

    #[test]
    fn empty_timeline_is_incomplete() {
        let tl = WinterTimeline::new("x", season(), vec![]).unwrap();
        let r = fit_phenology(&tl, &PriorConfig::default());
        assert!(r.incomplete);
        assert_eq!(r.fus, None);
        assert_eq!(r.fit_loss, None);
    }

    #[test]
    fn missing_break_up_keeps_freeze_up() {
        // Ice persists past the end of the season.
        let tl = timeline((0..273).step_by(3).map(|t| (t, if t >= 120 { 0.0 } else { 100.0 })));
        let r = fit_phenology(&tl, &PriorConfig::default());
        assert!(r.incomplete);
        assert_eq!(r.fus, Some(DayIndex(120)));
        assert_eq!(r.fue, Some(DayIndex(120)));
        assert_eq!((r.bus, r.bue, r.icd_days, r.cfd_days), (None, None, None, None));
    }

    #[test]
    fn only_fus_candidate_reported_alone() {
        // Frozen share climbs to 50 % and stays.
        let tl = timeline((0..273).step_by(2).map(|t| (t, if t >= 100 { 50.0 } else { 100.0 })));
        let r = fit_phenology(&tl, &PriorConfig::default());
        assert!(r.incomplete);
        assert_eq!(r.fus, Some(DayIndex(100)));
        assert_eq!(r.fue, None);
    }

    fn oracle(tl: &WinterTimeline, prior: &ResolvedPrior) -> Option<[u32; 4]> {
        let c = extract_candidates(tl);
        let mut all = Vec::new();
        for &a in &c.fus {
            for &b in &c.fue {
                for &e in &c.bus {
                    for &f in &c.bue {
                        if let Ok(x) = EventDates::feasible(a, b, e, f) {
                            let mut s = 0.0;
                            for p in tl.points() {
                                s += huber(p.nf_percent - model_nf(p.day, &x), HuberParams::default());
                            }
                            let mut w = 1.0;
                            for (k, ev) in LipEvent::ALL.iter().enumerate() {
                                let z = x.get(*ev).0 as f64 - prior.means[k];
                                w *= (-z * z / (2.0 * prior.sigma * prior.sigma)).exp();
                            }
                            let l = if s == 0.0 { 0.0 } else { s / w };
                            all.push((l, [a.0, b.0, e.0, f.0]));
                        }
                    }
                }
            }
        }
        // Stable sort keeps the lexicographically first tuple among ties.
        all.sort_by(|x, y| x.0.total_cmp(&y.0));
        all.first().map(|x| x.1)
    }

    proptest! {
        #[test]
        fn matches_brute_force(nf in proptest::collection::vec(0.0f64..=100.0, 20..60), start in 0u32..40, gap in 1u32..5) {
            let tl = timeline(nf.iter().enumerate().map(|(i, &v)| (start + i as u32 * gap, v)));
            let r = fit_phenology(&tl, &PriorConfig::default());
            let want = oracle(&tl, &PriorConfig::default().resolve(season()));
            match want {
                Some(w) => {
                    prop_assert!(!r.incomplete);
                    prop_assert_eq!([r.fus.unwrap().0, r.fue.unwrap().0, r.bus.unwrap().0, r.bue.unwrap().0], w);
                }
                None => prop_assert!(r.incomplete),
            }
        }

        #[test]
        fn step_curve_recovered_exactly(fus in 30u32..150, plateau in 0u32..100, sigma in 1.0f64..200.0) {
            let bus = (fus + plateau).min(272);
            let x = d(fus, fus, bus, bus);
            let tl = timeline((0..273).map(|t| (t, model_nf(DayIndex(t), &x))));
            let cfg = PriorConfig::default().with_sigma(sigma).unwrap();
            let r = fit_phenology(&tl, &cfg);
            if bus > fus {
                prop_assert_eq!(r.fus, Some(DayIndex(fus)));
                prop_assert_eq!(r.bue, Some(DayIndex(bus)));
                prop_assert_eq!(r.fit_loss, Some(0.0));
            }
        }

        #[test]
        fn loss_nonnegative_and_zero_iff_exact(nf in proptest::collection::vec(0.0f64..=100.0, 5..30), a in 0u32..60, b in 0u32..15, c in 0u32..60, e in 0u32..15) {
            let x = EventDates::feasible(DayIndex(a), DayIndex(a + b), DayIndex(a + b + c), DayIndex(a + b + c + e)).unwrap();
            let prior = PriorConfig::default().resolve(season());
            let tl = timeline(nf.iter().enumerate().map(|(i, &v)| (i as u32 * 7, v)));
            let l = fit_loss(&tl, &x, &prior, HuberParams::default());
            prop_assert!(l >= 0.0);
            let exact = tl.points().iter().all(|p| p.nf_percent == model_nf(p.day, &x));
            prop_assert_eq!(l == 0.0, exact);
        }
    }
}
