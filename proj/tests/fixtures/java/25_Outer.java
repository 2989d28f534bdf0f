class Outer {
    static class Point {
        final int x;
        Point(int x) {
            this.x = x;
        }
    }
    Point origin() {
        return new Point(0);
    }
}
