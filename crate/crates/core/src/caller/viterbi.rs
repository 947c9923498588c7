use super::events::EventSequence;
use super::templates::GrammarToken;
use super::CallerParams;

const NONE: u16 = u16::MAX;
const STAY: u16 = 0;
const ADVANCE: u16 = 1;
const SKIP: u16 = 2;
const ENTRY: u16 = 3;

/// States of one grammar token: one track per variant, one state per level.
pub(crate) struct TokenStates {
    /// Per track: (variant, first local state, length).
    tracks: Vec<(usize, usize, usize)>,
    levels: Vec<f64>,
    track_of: Vec<u32>,
    /// Inclusive event-count band.
    band: (usize, usize),
}

impl TokenStates {
    fn n_states(&self) -> usize {
        self.levels.len()
    }
}

/// Grammar flattened into per-token state blocks, optionally in reverse time.
pub(crate) struct Lattice {
    tokens: Vec<TokenStates>,
}

impl Lattice {
    pub(crate) fn new(tokens: &[GrammarToken], band: f64, reversed: bool) -> Self {
        let mut order: Vec<&GrammarToken> = tokens.iter().collect();
        if reversed {
            order.reverse();
        }
        let tokens = order
            .into_iter()
            .map(|tok| {
                let mut ts = TokenStates {
                    tracks: Vec::new(),
                    levels: Vec::new(),
                    track_of: Vec::new(),
                    band: (0, 0),
                };
                for (v, tpl) in tok.variants().iter().enumerate() {
                    let first = ts.levels.len();
                    if reversed {
                        ts.levels.extend(tpl.levels.iter().rev());
                    } else {
                        ts.levels.extend(&tpl.levels);
                    }
                    ts.track_of.extend(std::iter::repeat_n(
                        ts.tracks.len() as u32,
                        tpl.levels.len(),
                    ));
                    ts.tracks.push((v, first, tpl.levels.len()));
                }
                let len = tok.nominal_len() as f64;
                let lo = ((1.0 - band) * len).floor().max(1.0) as usize;
                let hi = ((1.0 + band) * len).ceil() as usize;
                ts.band = (lo, hi);
                ts
            })
            .collect();
        Lattice { tokens }
    }

    pub(crate) fn n_tokens(&self) -> usize {
        self.tokens.len()
    }

    /// Fewest events any banded path uses.
    pub(crate) fn min_events(&self) -> usize {
        self.tokens.iter().map(|t| t.band.0).sum()
    }

    /// Events at which each token can be active given the bands and the total.
    fn ranges(&self, n_events: usize) -> Vec<Option<(usize, usize)>> {
        let n = self.tokens.len();
        let mut lo_before = vec![0usize; n + 1];
        let mut hi_before = vec![0usize; n + 1];
        for (t, ts) in self.tokens.iter().enumerate() {
            lo_before[t + 1] = lo_before[t] + ts.band.0;
            hi_before[t + 1] = hi_before[t] + ts.band.1;
        }
        (0..n)
            .map(|t| {
                let lo_after = lo_before[n] - lo_before[t + 1];
                let hi_from = hi_before[n] - hi_before[t];
                let first = lo_before[t].max(n_events.saturating_sub(hi_from));
                let end = hi_before[t + 1].min(n_events.checked_sub(lo_after)?);
                (first < end).then(|| (first, end - 1))
            })
            .collect()
    }
}

/// Viterbi table stored per token over that token's active events.
pub(crate) struct Table {
    n_events: usize,
    ranges: Vec<Option<(usize, usize)>>,
    offsets: Vec<usize>,
    widths: Vec<usize>,
    score: Vec<f64>,
    start: Vec<u32>,
    back: Vec<u16>,
    /// Best complete path score and its final local state.
    pub(crate) best: f64,
    best_state: usize,
}

impl Table {
    #[inline]
    fn row(&self, t: usize, e: usize) -> Option<usize> {
        let (lo, hi) = self.ranges[t]?;
        (lo..=hi)
            .contains(&e)
            .then(|| self.offsets[t] + (e - lo) * self.widths[t])
    }
}

pub(crate) struct Costs {
    stay: f64,
    advance: f64,
    skip: f64,
    inv_two_var: f64,
}

impl Costs {
    pub(crate) fn new(params: &CallerParams, noise_std: f64) -> Self {
        let sigma = noise_std.max(params.sigma_floor);
        Self {
            stay: params.p_stay.ln(),
            advance: params.p_advance.ln(),
            skip: params.p_skip.ln(),
            inv_two_var: 1.0 / (2.0 * sigma * sigma),
        }
    }

    /// Gaussian log-likelihood of an event's samples at `mu`, up to a constant.
    #[inline]
    pub(crate) fn emit(&self, level: f64, support: u32, mu: f64) -> f64 {
        let d = level - mu;
        -f64::from(support) * d * d * self.inv_two_var
    }
}

/// Left-to-right Viterbi over events. Within a track a step stays, advances
/// one level or skips one; crossing into the next token the same moves apply
/// to the concatenated level sequence. Every token's event count lies in its band.
pub(crate) fn forward(lat: &Lattice, events: &EventSequence, costs: &Costs) -> Table {
    let e_n = events.len();
    let ranges = lat.ranges(e_n);
    let mut offsets = Vec::with_capacity(ranges.len());
    let mut widths = Vec::with_capacity(ranges.len());
    let mut total = 0;
    for (ts, r) in lat.tokens.iter().zip(&ranges) {
        offsets.push(total);
        widths.push(ts.n_states());
        if let Some((lo, hi)) = r {
            total += (hi - lo + 1) * ts.n_states();
        }
    }
    let mut table = Table {
        n_events: e_n,
        ranges,
        offsets,
        widths,
        score: vec![f64::NEG_INFINITY; total],
        start: vec![0; total],
        back: vec![NONE; total],
        best: f64::NEG_INFINITY,
        best_state: 0,
    };
    if e_n == 0 || table.ranges.iter().any(Option::is_none) {
        return table;
    }

    for e in 0..e_n {
        let ev = events.events[e];
        for (t, ts) in lat.tokens.iter().enumerate() {
            let Some(cur) = table.row(t, e) else { continue };
            let prev = if e > 0 { table.row(t, e - 1) } else { None };

            // best ways to leave token t-1 at event e-1, landing on offset 0 or 1
            let mut exit0 = (f64::NEG_INFINITY, NONE);
            let mut exit1 = (f64::NEG_INFINITY, NONE);
            if e == 0 && t == 0 {
                exit0 = (costs.advance, NONE);
                exit1 = (costs.skip, NONE);
            } else if let Some(pr) = (t > 0 && e > 0).then(|| table.row(t - 1, e - 1)).flatten() {
                let prev_tok = &lat.tokens[t - 1];
                for (j, &(_, first, len)) in prev_tok.tracks.iter().enumerate() {
                    for c in 0..len.min(2) {
                        let i = pr + first + len - 1 - c;
                        let v = table.score[i];
                        let count = e - table.start[i] as usize;
                        if v == f64::NEG_INFINITY
                            || count < prev_tok.band.0
                            || count > prev_tok.band.1
                        {
                            continue;
                        }
                        let code = ENTRY + 2 * j as u16 + c as u16;
                        let to0 = v + if c == 0 { costs.advance } else { costs.skip };
                        if to0 > exit0.0 {
                            exit0 = (to0, code);
                        }
                        if c == 0 && v + costs.skip > exit1.0 {
                            exit1 = (v + costs.skip, code);
                        }
                    }
                }
            }

            let hi = ts.band.1;
            for &(_, first, len) in &ts.tracks {
                for p in 0..len {
                    let s = first + p;
                    let mut best = f64::NEG_INFINITY;
                    let mut code = NONE;
                    let mut st = 0u32;
                    if let Some(pr) = prev {
                        let moves = [
                            (0, costs.stay, STAY),
                            (1, costs.advance, ADVANCE),
                            (2, costs.skip, SKIP),
                        ];
                        for &(d, cost, c) in &moves[..=p.min(2)] {
                            let i = pr + s - d;
                            let v = table.score[i] + cost;
                            if v > best && e - (table.start[i] as usize) < hi {
                                best = v;
                                code = c;
                                st = table.start[i];
                            }
                        }
                    }
                    let entry = match p {
                        0 => exit0,
                        1 => exit1,
                        _ => (f64::NEG_INFINITY, NONE),
                    };
                    if entry.0 > best {
                        best = entry.0;
                        code = entry.1;
                        st = e as u32;
                    }
                    if best > f64::NEG_INFINITY {
                        let i = cur + s;
                        table.score[i] = best + costs.emit(ev.level, ev.support, ts.levels[s]);
                        table.start[i] = st;
                        table.back[i] = code;
                    }
                }
            }
        }
    }

    let last = lat.n_tokens() - 1;
    let ts = &lat.tokens[last];
    if let Some(row) = table.row(last, e_n - 1) {
        for &(_, first, len) in &ts.tracks {
            for (c, cost) in [(0usize, costs.advance), (1, costs.skip)] {
                if c >= len {
                    continue;
                }
                let s = first + len - 1 - c;
                let v = table.score[row + s];
                let count = e_n - table.start[row + s] as usize;
                if v > f64::NEG_INFINITY
                    && (ts.band.0..=ts.band.1).contains(&count)
                    && v + cost > table.best
                {
                    table.best = v + cost;
                    table.best_state = s;
                }
            }
        }
    }
    table
}

/// Token and variant visited at every event along the best path.
pub(crate) fn traceback(lat: &Lattice, table: &Table) -> Vec<(usize, usize)> {
    let e_n = table.n_events;
    let mut path = vec![(0, 0); e_n];
    if table.best == f64::NEG_INFINITY {
        return path;
    }
    let mut t = lat.n_tokens() - 1;
    let mut s = table.best_state;
    for e in (0..e_n).rev() {
        let ts = &lat.tokens[t];
        let track = ts.track_of[s] as usize;
        path[e] = (t, ts.tracks[track].0);
        if e == 0 {
            break;
        }
        let row = table.row(t, e).expect("path stays inside token ranges");
        match table.back[row + s] {
            STAY => {}
            ADVANCE => s -= 1,
            SKIP => s -= 2,
            code => {
                let rel = (code - ENTRY) as usize;
                let (j, c) = (rel / 2, rel % 2);
                t -= 1;
                let (_, first, len) = lat.tokens[t].tracks[j];
                s = first + len - 1 - c;
            }
        }
    }
    path
}

/// Best complete path score through each variant of every token, combining a
/// forward table with the table of the time-reversed problem.
pub(crate) fn max_marginals(
    lat: &Lattice,
    fwd: &Table,
    rev_lat: &Lattice,
    rev: &Table,
    events: &EventSequence,
    costs: &Costs,
) -> Vec<Vec<f64>> {
    let e_n = events.len();
    let n_tokens = lat.n_tokens();
    let mut out = Vec::with_capacity(n_tokens);
    for (t, ts) in lat.tokens.iter().enumerate() {
        let rt = n_tokens - 1 - t;
        let rts = &rev_lat.tokens[rt];
        let mut best = vec![f64::NEG_INFINITY; ts.tracks.len()];
        if let Some((lo, hi)) = fwd.ranges[t] {
            for e in lo..=hi {
                let ev = events.events[e];
                let row = fwd.row(t, e).expect("inside range");
                let Some(rrow) = rev.row(rt, e_n - 1 - e) else {
                    continue;
                };
                for (k, &(_, first, len)) in ts.tracks.iter().enumerate() {
                    let (_, rfirst, rlen) = rts.tracks[k];
                    debug_assert_eq!(len, rlen);
                    for p in 0..len {
                        let i = row + first + p;
                        let ri = rrow + rfirst + len - 1 - p;
                        let (f, b) = (fwd.score[i], rev.score[ri]);
                        if f == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
                            continue;
                        }
                        let started = fwd.start[i] as usize;
                        let ended = e_n - 1 - rev.start[ri] as usize;
                        let count = ended + 1 - started;
                        if count < ts.band.0 || count > ts.band.1 {
                            continue;
                        }
                        let v = f + b - costs.emit(ev.level, ev.support, ts.levels[first + p]);
                        if v > best[k] {
                            best[k] = v;
                        }
                    }
                }
            }
        }
        out.push(best);
    }
    out
}
