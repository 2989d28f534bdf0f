class Days {
    String name(int d) {
        String s;
        switch (d) {
            case 1:
                s = "Mon";
                break;
            default:
                s = "Other";
        }
        return s;
    }
}
