fn main() {
    println!("symk");
}
