//! Thin command-line entry point; all logic lives in the library.

fn main() {
    std::process::exit(mfh_lab::cli::run_from_env());
}
