fn main() {
    let env_threads = std::env::var(ffrt::config::THREADS_ENV).ok();
    let code = ffrt::run(std::env::args_os(), env_threads.as_deref(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
