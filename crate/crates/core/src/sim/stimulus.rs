// SPDX-License-Identifier: Apache-2.0

//! Line-oriented stimulus files:
//!
//! ```text
//! clock clk period 2
//! at 0 drive rst = 1
//! at 4 drive key = 8'hA5
//! run 64
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::Time;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockSpec {
    pub signal: String,
    pub period: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drive {
    pub t: Time,
    pub signal: String,
    pub value: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stimulus {
    pub clock: Option<ClockSpec>,
    /// Sorted by time; stable for equal times.
    pub drives: Vec<Drive>,
    pub duration: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}:{line}: {message}")]
pub struct StimulusError {
    pub path: String,
    pub line: usize,
    pub message: String,
}

/// Parses `123`, `0x7f`, `0b101`, `'hff`, `8'hA5`, `4'b1010` or `3'd5`.
pub fn parse_value(s: &str) -> Option<u64> {
    let s = s.replace('_', "");
    let (digits, radix) = if let Some(h) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        (h.to_string(), 16)
    } else if let Some(b) = s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        (b.to_string(), 2)
    } else if let Some(pos) = s.find('\'') {
        let (width, rest) = s.split_at(pos);
        if !width.is_empty() && width.parse::<u32>().ok().filter(|w| (1..=64).contains(w)).is_none() {
            return None;
        }
        let mut chars = rest[1..].chars();
        let radix = match chars.next()?.to_ascii_lowercase() {
            'b' => 2,
            'o' => 8,
            'd' => 10,
            'h' => 16,
            _ => return None,
        };
        let digits: String = chars.collect();
        let v = u64::from_str_radix(&digits, radix).ok()?;
        if let Ok(w) = width.parse::<u32>() {
            if w < 64 && v >> w != 0 {
                return None;
            }
        }
        return Some(v);
    } else {
        (s.clone(), 10)
    };
    u64::from_str_radix(&digits, radix).ok()
}

impl Stimulus {
    pub fn parse(path: &str, text: &str) -> Result<Stimulus, StimulusError> {
        let mut stim = Stimulus::default();
        let mut duration = None;
        let mut drive_lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| StimulusError {
                path: path.to_string(),
                line,
                message,
            };
            let content = raw
                .split('#')
                .next()
                .unwrap_or("")
                .split("//")
                .next()
                .unwrap_or("")
                .trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            let num = |w: &str| {
                w.parse::<Time>()
                    .map_err(|_| err(format!("expected a time step count, found `{w}`")))
            };
            match words.as_slice() {
                ["clock", sig, "period", p] => {
                    if stim.clock.is_some() {
                        return Err(err("clock declared twice".into()));
                    }
                    let period = num(p)?;
                    if period < 2 {
                        return Err(err("clock period must be at least 2".into()));
                    }
                    stim.clock = Some(ClockSpec {
                        signal: sig.to_string(),
                        period,
                    });
                }
                ["at", t, "drive", sig, "=", v] => {
                    let t = num(t)?;
                    let value =
                        parse_value(v).ok_or_else(|| err(format!("invalid value `{v}`")))?;
                    stim.drives.push(Drive {
                        t,
                        signal: sig.to_string(),
                        value,
                    });
                    drive_lines.push(line);
                }
                ["run", n] => {
                    if duration.is_some() {
                        return Err(err("`run` given twice".into()));
                    }
                    duration = Some(num(n)?);
                }
                _ => {
                    return Err(err(format!(
                        "expected `clock <sig> period <n>`, `at <t> drive <sig> = <value>` or `run <n>`, found `{content}`"
                    )))
                }
            }
        }
        stim.duration = duration.ok_or_else(|| StimulusError {
            path: path.to_string(),
            line: text.lines().count().max(1),
            message: "missing `run <n>`".into(),
        })?;
        if let Some(k) = stim.drives.iter().position(|d| d.t >= stim.duration) {
            let d = &stim.drives[k];
            return Err(StimulusError {
                path: path.to_string(),
                line: drive_lines[k],
                message: format!("drive at t={} is not before the end of the run ({})", d.t, stim.duration),
            });
        }
        stim.drives.sort_by_key(|d| d.t);
        Ok(stim)
    }

    /// Renders the stimulus in the file format accepted by [`Stimulus::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(c) = &self.clock {
            let _ = writeln!(s, "clock {} period {}", c.signal, c.period);
        }
        for d in &self.drives {
            let _ = writeln!(s, "at {} drive {} = {}", d.t, d.signal, d.value);
        }
        let _ = writeln!(s, "run {}", self.duration);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(parse_value("12"), Some(12));
        assert_eq!(parse_value("0x1F"), Some(31));
        assert_eq!(parse_value("0b101"), Some(5));
        assert_eq!(parse_value("8'hA5"), Some(0xa5));
        assert_eq!(parse_value("4'b1010"), Some(10));
        assert_eq!(parse_value("'d7"), Some(7));
        assert_eq!(parse_value("2'd7"), None);
        assert_eq!(parse_value("x"), None);
    }

    #[test]
    fn parse_roundtrip() {
        let text = "# header\nclock clk period 4\nat 3 drive en = 1 // enable\nat 1 drive key = 8'hA5\n\nrun 20\n";
        let s = Stimulus::parse("s.stim", text).unwrap();
        assert_eq!(s.clock.as_ref().unwrap().period, 4);
        assert_eq!(s.drives[0].signal, "key");
        assert_eq!(s.duration, 20);
        assert_eq!(Stimulus::parse("s.stim", &s.to_text()).unwrap(), s);
    }

    #[test]
    fn errors_cite_lines() {
        let e = Stimulus::parse("s.stim", "run 4\nat x drive a = 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.to_string().starts_with("s.stim:2:"));
        let e = Stimulus::parse("s.stim", "at 1 drive a = 1\n").unwrap_err();
        assert!(e.message.contains("run"));
        let e = Stimulus::parse("s.stim", "at 9 drive a = 1\nrun 4\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = Stimulus::parse("s.stim", "run 4\nfoo\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = Stimulus::parse("s.stim", "at 1 drive a = 1\nat 9 drive a = 2\nrun 4\n").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
