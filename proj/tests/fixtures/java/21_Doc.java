/* header */
class Doc {
    // field
    int a; /* trailing */
    /**
     * Javadoc
     */
    int twice() {
        return a * 2; // double
    }
}
