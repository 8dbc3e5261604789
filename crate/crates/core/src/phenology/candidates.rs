use serde::Serialize;

use crate::season::DayIndex;
use crate::timeline::WinterTimeline;

const ONSET: f64 = 30.0;
const COMPLETE: f64 = 70.0;

/// Days satisfying each event's threshold rule against the previous
/// admitted acquisition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EventCandidates {
    pub fus: Vec<DayIndex>,
    pub fue: Vec<DayIndex>,
    pub bus: Vec<DayIndex>,
    pub bue: Vec<DayIndex>,
}

impl EventCandidates {
    pub fn counts(&self) -> [usize; 4] {
        [self.fus.len(), self.fue.len(), self.bus.len(), self.bue.len()]
    }
}

/// Threshold crossings: FUS / FUE when the frozen share reaches 30 / 70 %
/// after a day below it, BUS / BUE likewise for the non-frozen share. The
/// first acquisition has no predecessor and is never a candidate.
pub fn extract_candidates(tl: &WinterTimeline) -> EventCandidates {
    let mut c = EventCandidates::default();
    for pair in tl.points().windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let (f_prev, f_cur) = (prev.frozen_percent(), cur.frozen_percent());
        let (n_prev, n_cur) = (prev.nf_percent, cur.nf_percent);
        if f_cur >= ONSET && f_prev < ONSET {
            c.fus.push(cur.day);
        }
        if f_cur >= COMPLETE && f_prev < COMPLETE {
            c.fue.push(cur.day);
        }
        if n_cur >= ONSET && n_prev < ONSET {
            c.bus.push(cur.day);
        }
        if n_cur >= COMPLETE && n_prev < COMPLETE {
            c.bue.push(cur.day);
        }
    }
    c
}
