fn main() {
    println!("fedzsl");
}
