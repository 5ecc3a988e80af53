use serde::{Deserialize, Serialize};

/// Best-effort description of the machine a report came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub cpu_model: String,
    pub logical_cores: usize,
    pub frequency_mhz: Option<f64>,
    pub os: String,
    pub arch: String,
    pub crate_version: String,
}

impl Environment {
    pub fn capture() -> Self {
        let cpuinfo = std::fs::read_to_string("/proc/cpuinfo").unwrap_or_default();
        Self {
            cpu_model: cpu_model(&cpuinfo).unwrap_or_else(|| "unknown".into()),
            logical_cores: crate::merkle::available_threads(),
            frequency_mhz: max_frequency_mhz().or_else(|| cpuinfo_mhz(&cpuinfo)),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

fn field<'a>(cpuinfo: &'a str, key: &str) -> Option<&'a str> {
    cpuinfo.lines().find_map(|line| {
        let (k, v) = line.split_once(':')?;
        (k.trim() == key).then(|| v.trim()).filter(|v| !v.is_empty())
    })
}

fn cpu_model(cpuinfo: &str) -> Option<String> {
    ["model name", "Model", "Hardware", "cpu model", "CPU part"]
        .iter()
        .find_map(|k| field(cpuinfo, k))
        .map(str::to_string)
}

fn cpuinfo_mhz(cpuinfo: &str) -> Option<f64> {
    field(cpuinfo, "cpu MHz")?.parse().ok()
}

fn max_frequency_mhz() -> Option<f64> {
    let khz: f64 = std::fs::read_to_string("/sys/devices/system/cpu/cpu0/cpufreq/cpuinfo_max_freq")
        .ok()?
        .trim()
        .parse()
        .ok()?;
    Some(khz / 1000.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cpuinfo_fields() {
        let text = "processor\t: 0\nmodel name\t: Example CPU @ 2.80GHz\ncpu MHz\t\t: 2800.000\n";
        assert_eq!(cpu_model(text).as_deref(), Some("Example CPU @ 2.80GHz"));
        assert_eq!(cpuinfo_mhz(text), Some(2800.0));
        assert_eq!(cpu_model("CPU part\t: 0xd4f\n").as_deref(), Some("0xd4f"));
        assert_eq!(cpu_model(""), None);
    }

    #[test]
    fn capture_fills_required_fields() {
        let env = Environment::capture();
        assert!(env.logical_cores >= 1);
        assert!(!env.os.is_empty() && !env.arch.is_empty());
    }
}
