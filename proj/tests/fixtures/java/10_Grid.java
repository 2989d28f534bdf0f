class Grid {
    int cells(int w, int h) {
        int n = 0;
        for (int y = 0; y < h; y++) {
            int x = 0;
            while (x < w) {
                n++;
                x++;
            }
        }
        return n;
    }
}
