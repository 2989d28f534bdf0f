import java.util.function.Function;

class Lambdas {
    Function<Integer, Integer> twice() {
        int k = 2;
        return v -> v * k;
    }
}
