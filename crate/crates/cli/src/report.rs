//! Diagnostics on standard error.

use std::io::IsTerminal;

use sfdsim::lang::Severity;
use sfdsim::ParseDiagnostic;

pub fn use_color() -> bool {
    std::env::var_os("SFDSIM_NO_COLOR").is_none() && std::io::stderr().is_terminal()
}

pub fn stdout_color() -> bool {
    std::env::var_os("SFDSIM_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn paint(text: &str, code: &str, color: bool) -> String {
    if color {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

pub fn format_diagnostic(path: &str, d: &ParseDiagnostic, color: bool) -> String {
    let sev = match d.severity {
        Severity::Error => paint("error", "1;31", color),
        Severity::Warning => paint("warning", "1;33", color),
    };
    format!("{path}:{}:{}: {sev}[{}]: {}", d.line, d.column, d.code, d.message)
}

pub fn print_diagnostics(path: &str, diags: &[ParseDiagnostic]) {
    let color = use_color();
    for d in diags {
        eprintln!("{}", format_diagnostic(path, d, color));
    }
}

pub fn print_error(message: &str) {
    eprintln!("{}: {message}", paint("error", "1;31", use_color()));
}
