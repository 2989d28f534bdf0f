import java.util.List;

class Names {
    int count(List<String> names) {
        int c = 0;
        for (String n : names) {
            if (n.isEmpty()) continue;
            c++;
        }
        return c;
    }
}
