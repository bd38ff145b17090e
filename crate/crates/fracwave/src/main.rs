//! Command-line entry point (implementation follows).

fn main() {
    println!("fracwave: pipeline CLI not wired yet");
}
