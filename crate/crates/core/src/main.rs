fn main() {
    qicas::cli::main()
}
