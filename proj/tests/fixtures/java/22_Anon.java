class Anon {
    Runnable task(int n) {
        return new Runnable() {
            public void run() {
                work(n);
            }
        };
    }
}
