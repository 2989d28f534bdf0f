class Shadow {
    int x;
    void set(int x) {
        this.x = x;
    }
    int get() {
        return x;
    }
}
