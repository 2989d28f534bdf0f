class Sum {
    int total(int[] xs) {
        int s = 0;
        for (int i = 0; i < xs.length; i++) {
            s = s + xs[i];
        }
        return s;
    }
}
