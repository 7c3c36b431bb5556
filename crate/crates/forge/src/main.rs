use std::io::Write;

fn main() {
    let outcome = ranking_forge::run_cli(std::env::args_os());
    let text = outcome.output.as_str();
    if outcome.exit_code == ranking_forge::ExitCode::Usage {
        eprint!("{text}");
    } else {
        print!("{text}");
        let _ = std::io::stdout().flush();
    }
    std::process::exit(outcome.exit_code.code());
}
