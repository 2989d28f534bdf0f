import java.util.ArrayList;
import java.util.List;

class Box<T extends Comparable<T>> {
    private final List<T> items = new ArrayList<>();
    <R> R first(R fallback) {
        return items.isEmpty() ? fallback : null;
    }
}
