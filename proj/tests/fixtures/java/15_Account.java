class Account {
    private double balance;
    void deposit(double amount) {
        this.balance += amount;
        this.balance -= fee();
    }
    double fee() { return 1.5; }
}
