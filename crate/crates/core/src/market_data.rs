//! Tick-file parsing, deterministic trade classification and per-side
//! counting processes.
//!
//! The wire format is one tick per line with the fields
//! `Time, Type, Symbol, Expiry, Event, Side, Price, Qty, Oid1, Oid2`
//! where `Time` is `HH:MM:SS.fffffffff` within the trading day. A trade tick
//! carries the passive (standing) order id in `Oid1` and the aggressive order
//! id in `Oid2`; every other tick carries `-1` in `Oid2`. Looking up the side
//! of the passive order classifies each trade deterministically: the trade
//! side is the opposite of the passive side.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::BufRead;
use thiserror::Error;

pub const NANOS_PER_SEC: u64 = 1_000_000_000;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("failed to read tick source: {0}")]
    Io(#[from] std::io::Error),
    #[error("zero parseable lines in tick source ({malformed} malformed)")]
    ZeroParseableLines { malformed: usize },
    #[error("order {oid} seen with conflicting sides {first:?} and {second:?}")]
    ConflictingOrderSide { oid: i64, first: Side, second: Side },
}

/// Aggressor side of a trade, or side of a resting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "BUY",
            Side::Sell => "SELL",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "BUY" => Some(Side::Buy),
            "SELL" => Some(Side::Sell),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    NewTick,
    ModifyTick,
    CancelTick,
    Trade,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::NewTick => "NEW_TICK",
            EventKind::ModifyTick => "MODIFY_TICK",
            EventKind::CancelTick => "CANCEL_TICK",
            EventKind::Trade => "TRADE",
        }
    }

    fn parse(s: &str) -> Option<EventKind> {
        match s {
            "NEW_TICK" => Some(EventKind::NewTick),
            "MODIFY_TICK" => Some(EventKind::ModifyTick),
            "CANCEL_TICK" => Some(EventKind::CancelTick),
            "TRADE" => Some(EventKind::Trade),
            _ => None,
        }
    }
}

/// One tick as disseminated by the exchange.
///
/// `nanos` is the timestamp as integer nanoseconds since midnight; ordering
/// comparisons always use this field so no precision is lost over a session.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTick {
    pub nanos: u64,
    pub instrument_type: String,
    pub symbol: String,
    pub expiry: String,
    pub event: EventKind,
    pub side: Side,
    pub price: f64,
    pub qty: u64,
    pub oid1: i64,
    pub oid2: i64,
}

/// Symbol/expiry filter applied while parsing. `None` matches everything.
#[derive(Debug, Clone, Default)]
pub struct TickFilter {
    pub symbol: Option<String>,
    pub expiry: Option<String>,
}

impl TickFilter {
    pub fn matches(&self, tick: &RawTick) -> bool {
        self.symbol.as_deref().map_or(true, |s| s == tick.symbol)
            && self.expiry.as_deref().map_or(true, |e| e == tick.expiry)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ParseReport {
    pub parsed: usize,
    pub malformed: usize,
    pub filtered_out: usize,
}

/// Trading session clock: tick timestamps are nanoseconds since midnight,
/// trade times are seconds since session open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Session {
    /// Session open as nanoseconds since midnight.
    pub open_nanos: u64,
    /// Session length in seconds.
    pub length: f64,
}

impl Session {
    pub fn new(open_nanos: u64, length: f64) -> Session {
        Session { open_nanos, length }
    }

    /// NSE equity-derivatives session: 09:15:00 to 15:30:00 (375 minutes).
    pub fn nse() -> Session {
        Session::new((9 * 3600 + 15 * 60) * NANOS_PER_SEC, 375.0 * 60.0)
    }

    /// Seconds since session open for a nanosecond timestamp.
    pub fn seconds_from_open(&self, nanos: u64) -> f64 {
        (nanos as i128 - self.open_nanos as i128) as f64 / NANOS_PER_SEC as f64
    }

    pub fn nanos_at(&self, seconds_from_open: f64) -> u64 {
        (self.open_nanos as i128 + (seconds_from_open * NANOS_PER_SEC as f64).round() as i128)
            .max(0) as u64
    }
}

/// A classified trade: the atom of all counting processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeEvent {
    /// Seconds since session open.
    pub t: f64,
    /// Original timestamp, nanoseconds since midnight.
    pub nanos: u64,
    /// Side of the aggressive order.
    pub side: Side,
    pub qty: u64,
    pub price: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classified: usize,
    pub unclassifiable: usize,
    pub buy_count: usize,
    pub sell_count: usize,
}

/// Per-side counting process N(t) = number of events at or before t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingProcess {
    pub side: Side,
    /// Event times in seconds, non-decreasing.
    pub times: Vec<f64>,
}

impl CountingProcess {
    /// N(t): right-continuous count of events with time <= t.
    pub fn count_up_to(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Parse `HH:MM:SS.fffffffff` into nanoseconds since midnight.
/// The fractional part may carry 1 to 9 digits.
pub fn parse_timestamp(s: &str) -> Option<u64> {
    let s = s.trim();
    let (hms, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    let mut parts = hms.split(':');
    let h: u64 = parts.next()?.parse().ok()?;
    let m: u64 = parts.next()?.parse().ok()?;
    let sec: u64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || h > 23 || m > 59 || sec > 60 {
        return None;
    }
    let nanos_frac = if frac.is_empty() {
        0
    } else {
        if frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let raw: u64 = frac.parse().ok()?;
        raw * 10u64.pow(9 - frac.len() as u32)
    };
    Some((h * 3600 + m * 60 + sec) * NANOS_PER_SEC + nanos_frac)
}

fn parse_line(line: &str) -> Option<RawTick> {
    let fields: Vec<&str> = if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    };
    if fields.len() != 10 {
        return None;
    }
    let nanos = parse_timestamp(fields[0])?;
    let event = EventKind::parse(fields[4])?;
    let side = Side::parse(fields[5])?;
    let price: f64 = fields[6].parse().ok()?;
    let qty: u64 = fields[7].parse().ok()?;
    let oid1: i64 = fields[8].parse().ok()?;
    let oid2: i64 = fields[9].parse().ok()?;
    // Wire-format invariants: trades carry the aggressor id in oid2, all
    // other events carry the -1 sentinel; new orders and trades have qty > 0.
    match event {
        EventKind::Trade if oid2 == -1 => return None,
        EventKind::NewTick | EventKind::ModifyTick | EventKind::CancelTick if oid2 != -1 => {
            return None
        }
        _ => {}
    }
    if matches!(event, EventKind::NewTick | EventKind::Trade) && qty == 0 {
        return None;
    }
    Some(RawTick {
        nanos,
        instrument_type: fields[1].to_string(),
        symbol: fields[2].to_string(),
        expiry: fields[3].to_string(),
        event,
        side,
        price,
        qty,
        oid1,
        oid2,
    })
}

fn looks_like_header(line: &str) -> bool {
    let first = line
        .split([',', ' ', '\t'])
        .find(|f| !f.trim().is_empty())
        .unwrap_or("");
    first.eq_ignore_ascii_case("time")
}

/// Parse a delimited tick file, keeping ticks that match `filter` in file
/// order. Malformed lines are counted in the report rather than failing the
/// parse; an input where nothing parses at all is an error.
pub fn parse_tick_file<R: BufRead>(
    source: R,
    filter: &TickFilter,
) -> Result<(Vec<RawTick>, ParseReport), MarketDataError> {
    let mut ticks = Vec::new();
    let mut report = ParseReport::default();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 && looks_like_header(trimmed) {
            continue;
        }
        match parse_line(trimmed) {
            Some(tick) => {
                report.parsed += 1;
                if filter.matches(&tick) {
                    ticks.push(tick);
                } else {
                    report.filtered_out += 1;
                }
            }
            None => report.malformed += 1,
        }
    }
    if report.parsed == 0 {
        return Err(MarketDataError::ZeroParseableLines {
            malformed: report.malformed,
        });
    }
    Ok((ticks, report))
}

/// Classify every trade tick by looking up the side of its passive order.
///
/// The order-id index is built from NEW/MODIFY ticks in stream order; a
/// modify never changes an order's side and a conflicting re-registration is
/// an error. Trades whose passive order id was never seen are dropped and
/// counted as unclassifiable.
pub fn classify_trades(
    ticks: &[RawTick],
    session: &Session,
) -> Result<(Vec<TradeEvent>, ClassificationReport), MarketDataError> {
    let mut side_index: HashMap<i64, Side> = HashMap::new();
    let mut trades = Vec::new();
    let mut report = ClassificationReport::default();
    for tick in ticks {
        match tick.event {
            EventKind::NewTick | EventKind::ModifyTick => match side_index.get(&tick.oid1) {
                Some(&prev) if prev != tick.side => {
                    return Err(MarketDataError::ConflictingOrderSide {
                        oid: tick.oid1,
                        first: prev,
                        second: tick.side,
                    })
                }
                Some(_) => {}
                None => {
                    side_index.insert(tick.oid1, tick.side);
                }
            },
            EventKind::CancelTick => {}
            EventKind::Trade => match side_index.get(&tick.oid1) {
                Some(&passive_side) => {
                    let side = passive_side.opposite();
                    match side {
                        Side::Buy => report.buy_count += 1,
                        Side::Sell => report.sell_count += 1,
                    }
                    report.classified += 1;
                    trades.push(TradeEvent {
                        t: session.seconds_from_open(tick.nanos),
                        nanos: tick.nanos,
                        side,
                        qty: tick.qty,
                        price: tick.price,
                    });
                }
                None => report.unclassifiable += 1,
            },
        }
    }
    Ok((trades, report))
}

/// Restrict a time-ordered trade sequence to one side.
pub fn build_counting_process(trades: &[TradeEvent], side: Side) -> CountingProcess {
    CountingProcess {
        side,
        times: trades
            .iter()
            .filter(|tr| tr.side == side)
            .map(|tr| tr.t)
            .collect(),
    }
}

/// Number of events in the half-open window (T-h, T].
pub fn window_count(cp: &CountingProcess, t_end: f64, h: f64) -> usize {
    debug_assert!(h > 0.0);
    cp.count_up_to(t_end) - cp.count_up_to(t_end - h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    pub const TABLE1: &str = "\
09:15:00.077863519, FUT, NIFTY, 20180927, NEW_TICK, BUY, 11348.85, 750, 1100000000000928, -1
09:15:00.078110149, FUT, NIFTY, 20180927, MODIFY_TICK, BUY, 11319.8, 75, 1100000000000724, -1
09:15:00.078405918, FUT, NIFTY, 20180927, MODIFY_TICK, BUY, 11340.15, 75, 1100000000000770, -1
09:15:00.078495133, FUT, NIFTY, 20180927, MODIFY_TICK, BUY, 11338.15, 75, 1100000000000769, -1
09:15:00.079233914, FUT, NIFTY, 20180927, NEW_TICK, SELL, 11417.0, 75, 1100000000000929, -1
09:15:00.079445682, FUT, NIFTY, 20180927, NEW_TICK, SELL, 11349.9, 75, 1100000000000930, -1
09:15:00.079855028, FUT, NIFTY, 20180927, NEW_TICK, BUY, 11315.0, 75, 1100000000000931, -1
09:15:00.080119943, FUT, NIFTY, 20180927, NEW_TICK, SELL, 11380.0, 150, 1100000000000932, -1
09:15:00.080125861, FUT, NIFTY, 20180927, NEW_TICK, BUY, 11260.0, 150, 1100000000000933, -1
09:15:00.081216269, FUT, NIFTY, 20180927, NEW_TICK, BUY, 11340.0, 75, 1100000000000935, -1
09:15:00.082875605, FUT, NIFTY, 20180927, NEW_TICK, BUY, 11029.0, 450, 1100000000000937, -1
09:15:00.083489061, FUT, NIFTY, 20180927, TRADE, SELL, 11348.85, 75, 1100000000000928, 1100000000000938
";

    fn parse_all(text: &str) -> (Vec<RawTick>, ParseReport) {
        parse_tick_file(Cursor::new(text), &TickFilter::default()).unwrap()
    }

    #[test]
    fn parses_first_row() {
        let (ticks, _) = parse_all(TABLE1);
        let t = &ticks[0];
        assert_eq!(t.event, EventKind::NewTick);
        assert_eq!(t.side, Side::Buy);
        assert_eq!(t.oid1, 1100000000000928);
        assert_eq!(t.oid2, -1);
        assert_eq!(t.qty, 750);
        assert_eq!(t.price, 11348.85);
        assert_eq!(
            t.nanos,
            (9 * 3600 + 15 * 60) * NANOS_PER_SEC + 77_863_519
        );
    }

    #[test]
    fn table1_has_twelve_ticks_one_trade() {
        let (ticks, report) = parse_all(TABLE1);
        assert_eq!(ticks.len(), 12);
        assert_eq!(report.parsed, 12);
        assert_eq!(report.malformed, 0);
        let trades = ticks
            .iter()
            .filter(|t| t.event == EventKind::Trade)
            .count();
        assert_eq!(trades, 1);
    }

    #[test]
    fn empty_file_is_an_error() {
        let err = parse_tick_file(Cursor::new(""), &TickFilter::default()).unwrap_err();
        assert!(matches!(
            err,
            MarketDataError::ZeroParseableLines { .. }
        ));
    }

    #[test]
    fn malformed_lines_are_counted_not_fatal() {
        let text = format!("garbage line\n{TABLE1}");
        let (ticks, report) = parse_all(&text);
        assert_eq!(ticks.len(), 12);
        assert_eq!(report.malformed, 1);
    }

    #[test]
    fn header_line_is_skipped() {
        let text = format!(
            "Time, Type, Symbol, Expiry, Event, Side, Price, Qty, Oid1, Oid2\n{TABLE1}"
        );
        let (ticks, report) = parse_all(&text);
        assert_eq!(ticks.len(), 12);
        assert_eq!(report.malformed, 0);
    }

    #[test]
    fn whitespace_delimited_lines_parse_too() {
        let text =
            "09:15:00.077863519 FUT NIFTY 20180927 NEW_TICK BUY 11348.85 750 1100000000000928 -1\n";
        let (ticks, _) = parse_all(text);
        assert_eq!(ticks.len(), 1);
        assert_eq!(ticks[0].side, Side::Buy);
    }

    #[test]
    fn filter_drops_other_symbols() {
        let filter = TickFilter {
            symbol: Some("BANKNIFTY".into()),
            expiry: None,
        };
        let err = parse_tick_file(Cursor::new(TABLE1), &filter);
        // All 12 lines parse but none match; not an error, just empty.
        let (ticks, report) = err.unwrap();
        assert!(ticks.is_empty());
        assert_eq!(report.filtered_out, 12);
    }

    #[test]
    fn classifies_table1_trade_as_sell() {
        let (ticks, _) = parse_all(TABLE1);
        let (trades, report) = classify_trades(&ticks, &Session::nse()).unwrap();
        assert_eq!(trades.len(), 1);
        // Passive order 1100000000000928 was a BUY, so the aggressor sold.
        assert_eq!(trades[0].side, Side::Sell);
        assert_eq!(report.classified, 1);
        assert_eq!(report.sell_count, 1);
        assert_eq!(report.buy_count, 0);
        assert!((trades[0].t - 0.083489061).abs() < 1e-12);
    }

    #[test]
    fn classifies_mirror_case_as_buy() {
        let text = "\
09:15:01.000000000, FUT, NIFTY, 20180927, NEW_TICK, SELL, 100.0, 10, 7, -1
09:15:02.000000000, FUT, NIFTY, 20180927, TRADE, BUY, 100.0, 10, 7, 8
";
        let (ticks, _) = parse_all(text);
        let (trades, _) = classify_trades(&ticks, &Session::nse()).unwrap();
        assert_eq!(trades.len(), 1);
        assert_eq!(trades[0].side, Side::Buy);
    }

    #[test]
    fn orphan_trade_is_unclassifiable() {
        let text = "09:15:02.000000000, FUT, NIFTY, 20180927, TRADE, BUY, 100.0, 10, 999, 8\n";
        let (ticks, _) = parse_all(text);
        let (trades, report) = classify_trades(&ticks, &Session::nse()).unwrap();
        assert!(trades.is_empty());
        assert_eq!(report.unclassifiable, 1);
    }

    #[test]
    fn conflicting_order_side_is_an_error() {
        let text = "\
09:15:01.000000000, FUT, NIFTY, 20180927, NEW_TICK, SELL, 100.0, 10, 7, -1
09:15:02.000000000, FUT, NIFTY, 20180927, MODIFY_TICK, BUY, 100.0, 10, 7, -1
";
        let (ticks, _) = parse_all(text);
        let err = classify_trades(&ticks, &Session::nse()).unwrap_err();
        assert!(matches!(err, MarketDataError::ConflictingOrderSide { oid: 7, .. }));
    }

    #[test]
    fn cancel_ticks_do_not_touch_the_index() {
        let text = "\
09:15:01.000000000, FUT, NIFTY, 20180927, NEW_TICK, SELL, 100.0, 10, 7, -1
09:15:01.500000000, FUT, NIFTY, 20180927, CANCEL_TICK, BUY, 100.0, 0, 7, -1
09:15:02.000000000, FUT, NIFTY, 20180927, TRADE, BUY, 100.0, 10, 7, 8
";
        let (ticks, _) = parse_all(text);
        let (trades, _) = classify_trades(&ticks, &Session::nse()).unwrap();
        // CANCEL with a different side must not corrupt the SELL registration.
        assert_eq!(trades[0].side, Side::Buy);
    }

    #[test]
    fn counting_process_counts_by_side() {
        let trades: Vec<TradeEvent> = [
            (1.0, Side::Buy),
            (2.0, Side::Sell),
            (3.0, Side::Buy),
            (4.0, Side::Buy),
            (5.0, Side::Sell),
            (6.0, Side::Buy),
            (7.0, Side::Sell),
            (8.0, Side::Buy),
            (9.0, Side::Sell),
        ]
        .iter()
        .map(|&(t, side)| TradeEvent {
            t,
            nanos: (t * 1e9) as u64,
            side,
            qty: 1,
            price: 100.0,
        })
        .collect();
        let buys = build_counting_process(&trades, Side::Buy);
        let sells = build_counting_process(&trades, Side::Sell);
        assert_eq!(buys.len(), 5);
        assert_eq!(sells.len(), 4);
    }

    #[test]
    fn empty_process_counts_zero() {
        let cp = build_counting_process(&[], Side::Sell);
        assert_eq!(cp.count_up_to(100.0), 0);
        assert_eq!(window_count(&cp, 10.0, 5.0), 0);
    }

    #[test]
    fn window_count_half_open_interval() {
        let cp = CountingProcess {
            side: Side::Sell,
            times: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(window_count(&cp, 3.0, 2.0), 2); // (1, 3] -> {2, 3}
        assert_eq!(cp.count_up_to(2.5), 2);
        assert_eq!(window_count(&cp, 0.5, 2.0), 0); // before first event
    }

    #[test]
    fn window_count_matches_linear_scan_oracle() {
        // Deterministic fake-random times via a LCG, then 50 random windows.
        let mut state: u64 = 0x9E3779B97F4A7C15;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut times: Vec<f64> = (0..1000).map(|_| next() * 1000.0).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cp = CountingProcess {
            side: Side::Buy,
            times: times.clone(),
        };
        for _ in 0..50 {
            let t_end = next() * 1100.0;
            let h = next() * 300.0 + 1e-6;
            let oracle = times.iter().filter(|&&x| x > t_end - h && x <= t_end).count();
            assert_eq!(window_count(&cp, t_end, h), oracle);
        }
    }

    #[test]
    fn timestamp_rejects_bad_format() {
        assert!(parse_timestamp("9:15").is_none());
        assert!(parse_timestamp("09:15:00.1234567890").is_none());
        assert!(parse_timestamp("ab:cd:ef").is_none());
        assert_eq!(
            parse_timestamp("09:15:00.5"),
            Some((9 * 3600 + 15 * 60) * NANOS_PER_SEC + 500_000_000)
        );
    }
}
