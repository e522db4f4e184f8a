//! Whitespace-separated token text for event streams.
//!
//! Single-delimiter streams use `D<v>` for data (`D-1 D0 D+1` balanced,
//! `D0 D1 D2` unsigned) and `B<n>` for a level-`n` boundary. Dual-starter
//! streams use `A<bits>` and `B<bits>`, e.g. `A01 B A1`. Lines starting
//! with `#` are comments.

use crate::codec::{Event, Mapping, Trit};
use crate::dual::{DualSymbol, Namespace};
use crate::error::{Error, Result};

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace)
}

pub fn parse_events(text: &str, mapping: Mapping) -> Result<Vec<Event>> {
    tokens(text)
        .map(|tok| {
            let bad = || Error::argument(format!("bad event token `{tok}`"));
            if let Some(v) = tok.strip_prefix('D') {
                let value: i64 = v.parse().map_err(|_| bad())?;
                Ok(Event::Data(Trit::from_value(value, mapping)?))
            } else if let Some(n) = tok.strip_prefix('B') {
                let level: u64 = n.parse().map_err(|_| bad())?;
                Ok(Event::Boundary(level))
            } else {
                Err(bad())
            }
        })
        .collect()
}

pub fn format_event(event: &Event, mapping: Mapping) -> String {
    match *event {
        Event::Data(t) => match (mapping, t.value(mapping)) {
            (Mapping::Balanced, v) if v > 0 => format!("D+{v}"),
            (_, v) => format!("D{v}"),
        },
        Event::Boundary(level) => format!("B{level}"),
    }
}

/// One token per event separated by spaces, with a newline after every
/// boundary so runs read as lines.
pub fn format_events(events: &[Event], mapping: Mapping) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&format_event(e, mapping));
        out.push(if e.is_boundary() { '\n' } else { ' ' });
    }
    if out.ends_with(' ') {
        out.pop();
        out.push('\n');
    }
    out
}

pub fn parse_dual(text: &str) -> Result<Vec<DualSymbol>> {
    tokens(text)
        .map(|tok| {
            let (ns, bits) = match tok.split_at(1) {
                ("A", rest) => (Namespace::A, rest),
                ("B", rest) => (Namespace::B, rest),
                _ => return Err(Error::argument(format!("bad dual token `{tok}`"))),
            };
            DualSymbol::from_bit_str(ns, bits)
        })
        .collect()
}

pub fn format_dual(symbols: &[DualSymbol]) -> String {
    let mut out = symbols
        .iter()
        .map(|s| format!("{}{}", s.namespace, s.bit_string()))
        .collect::<Vec<_>>()
        .join(" ");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_balanced_tokens() {
        let events = parse_events("D-1 D0 D+1 B2", Mapping::Balanced).unwrap();
        assert_eq!(
            events,
            vec![Event::Data(Trit::Low), Event::Data(Trit::Mid), Event::Data(Trit::High), Event::Boundary(2)]
        );
        assert_eq!(format_events(&events, Mapping::Balanced), "D-1 D0 D+1 B2\n");
        assert_eq!(parse_events("D1", Mapping::Balanced).unwrap(), vec![Event::Data(Trit::High)]);
    }

    #[test]
    fn domain_follows_mapping() {
        assert!(parse_events("D2", Mapping::Balanced).is_err());
        assert!(parse_events("D-1", Mapping::Unsigned).is_err());
        let events = parse_events("# header\nD2 B1\nD0", Mapping::Unsigned).unwrap();
        assert_eq!(format_events(&events, Mapping::Unsigned), "D2 B1\nD0\n");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_events("X1", Mapping::Balanced).is_err());
        assert!(parse_events("B", Mapping::Balanced).is_err());
        assert!(parse_events("Dx", Mapping::Balanced).is_err());
        assert!(parse_dual("C01").is_err());
        assert!(parse_dual("A02").is_err());
    }

    #[test]
    fn dual_tokens() {
        let symbols = parse_dual("A01 B\nA1").unwrap();
        assert_eq!(symbols.len(), 3);
        assert_eq!(format_dual(&symbols), "A01 B A1\n");
        assert_eq!(format_dual(&[]), "");
    }
}
